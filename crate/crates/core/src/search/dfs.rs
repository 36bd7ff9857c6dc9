use super::*;
use crate::store::Mark;

struct Frame {
    mark: Mark,
    id: RawId,
    right: Task,
    cfg: Config,
}

/// Depth-first search with backtracking through the store's trail. With a
/// window, paths deeper than `max` decisions are cut and results shallower
/// than `min` are skipped.
pub struct Dfs<'a> {
    s: Solver<'a>,
    base: Mark,
    cur: Option<Config>,
    stack: Vec<Frame>,
    window: Option<(usize, usize)>,
    cut: bool,
    done: bool,
}

impl<'a> Dfs<'a> {
    pub fn new(s: Solver<'a>) -> Self {
        Self::windowed(s, None)
    }

    pub(crate) fn windowed(s: Solver<'a>, window: Option<(usize, usize)>) -> Self {
        let base = s.store.mark();
        let cur = Some(s.initial());
        Dfs {
            s,
            base,
            cur,
            stack: Vec::new(),
            window,
            cut: false,
            done: false,
        }
    }

    /// Some path was cut by the window.
    pub(crate) fn was_cut(&self) -> bool {
        self.cut
    }

    pub(crate) fn into_solver(self) -> Solver<'a> {
        self.s
    }

    fn finish(&mut self) {
        self.done = true;
        self.stack.clear();
        self.cur = None;
        self.s.store.undo_to(self.base);
    }
}

impl Iterator for Dfs<'_> {
    type Item = SearchResult<ResultRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let mut cfg = match self.cur.take() {
                Some(c) => c,
                None => {
                    let Some(f) = self.stack.pop() else {
                        self.finish();
                        return None;
                    };
                    self.s.store.undo_to(f.mark);
                    self.s.descend(&f.cfg, &f.id, f.right, false)
                }
            };
            match self.s.expand(&mut cfg) {
                Err(e) => {
                    self.finish();
                    return Some(Err(e));
                }
                Ok(Step::Dead) => {}
                Ok(Step::Solution(r)) => {
                    if self.window.is_none_or(|(min, _)| cfg.depth >= min) {
                        return Some(Ok(r));
                    }
                }
                Ok(Step::Branch(id, l, r)) => {
                    if self.window.is_some_and(|(_, max)| cfg.depth >= max) {
                        self.cut = true;
                        continue;
                    }
                    let mark = self.s.store.mark();
                    let left = self.s.descend(&cfg, &id, l, true);
                    self.stack.push(Frame {
                        mark,
                        id,
                        right: r,
                        cfg,
                    });
                    self.cur = Some(left);
                }
            }
        }
    }
}

impl SearchRun for Dfs<'_> {
    fn stats(&self) -> SearchStats {
        self.s.stats
    }

    fn store(&self) -> &DecisionStore {
        &self.s.store
    }
}
