use super::*;

/// The search space of a value with decisions made explicit, expanded to a
/// bounded number of branch decisions.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchTree {
    Leaf(ResultRecord),
    Failure,
    Branch(RawId, Box<SearchTree>, Box<SearchTree>),
    /// Not expanded: the depth bound was reached.
    Cut,
}

impl SearchTree {
    /// Results in left-to-right order.
    pub fn leaves(&self) -> Vec<&ResultRecord> {
        let mut out = Vec::new();
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            match t {
                SearchTree::Leaf(r) => out.push(r),
                SearchTree::Branch(_, l, r) => {
                    todo.push(r);
                    todo.push(l);
                }
                SearchTree::Failure | SearchTree::Cut => {}
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        match self {
            SearchTree::Cut => false,
            SearchTree::Branch(_, l, r) => l.is_complete() && r.is_complete(),
            _ => true,
        }
    }
}

/// Leaves the store as it was found.
pub fn collect_tree(s: &mut Solver<'_>, depth_bound: usize) -> SearchResult<SearchTree> {
    let mark = s.store.mark();
    let cfg = s.initial();
    let t = grow(s, cfg, depth_bound);
    s.store.undo_to(mark);
    t
}

fn grow(s: &mut Solver<'_>, mut cfg: Config, bound: usize) -> SearchResult<SearchTree> {
    match s.expand(&mut cfg)? {
        Step::Dead => Ok(SearchTree::Failure),
        Step::Solution(r) => Ok(SearchTree::Leaf(r)),
        Step::Branch(..) if cfg.depth >= bound => Ok(SearchTree::Cut),
        Step::Branch(id, l, r) => {
            let mark = s.store.mark();
            let left = s.descend(&cfg, &id, l, true);
            let lt = grow(s, left, bound);
            s.store.undo_to(mark);
            let right = s.descend(&cfg, &id, r, false);
            let rt = grow(s, right, bound);
            s.store.undo_to(mark);
            Ok(SearchTree::Branch(id, Box::new(lt?), Box::new(rt?)))
        }
    }
}
