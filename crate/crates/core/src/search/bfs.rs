use std::collections::VecDeque;

use super::*;
use crate::store::Mark;

/// Breadth-first search by number of branch decisions. The store holds
/// one path at a time: each queued configuration carries the store
/// operations of its path, replayed before it is expanded.
pub struct Bfs<'a> {
    s: Solver<'a>,
    base: Mark,
    queue: VecDeque<(Config, Rc<[Op]>)>,
    done: bool,
}

impl<'a> Bfs<'a> {
    pub fn new(mut s: Solver<'a>) -> Self {
        s.record(true);
        let base = s.store.mark();
        let mut queue = VecDeque::new();
        queue.push_back((s.initial(), Rc::from(Vec::new())));
        Bfs {
            s,
            base,
            queue,
            done: false,
        }
    }

    fn extend(path: &[Op], more: Vec<Op>) -> Rc<[Op]> {
        path.iter().cloned().chain(more).collect()
    }
}

impl Iterator for Bfs<'_> {
    type Item = SearchResult<ResultRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.s.store.undo_to(self.base);
            let Some((mut cfg, path)) = self.queue.pop_front() else {
                self.done = true;
                return None;
            };
            self.s.replay(&path);
            self.s.take_log();
            match self.s.expand(&mut cfg) {
                Err(e) => {
                    self.done = true;
                    self.queue.clear();
                    self.s.store.undo_to(self.base);
                    return Some(Err(e));
                }
                Ok(Step::Dead) => {}
                Ok(Step::Solution(r)) => return Some(Ok(r)),
                Ok(Step::Branch(id, l, r)) => {
                    let shared = self.s.take_log();
                    let mark = self.s.store.mark();
                    for (task, left) in [(l, true), (r, false)] {
                        self.s.store.undo_to(mark);
                        let child = self.s.descend(&cfg, &id, task, left);
                        let mut ops = shared.clone();
                        ops.extend(self.s.take_log());
                        self.queue.push_back((child, Self::extend(&path, ops)));
                    }
                }
            }
        }
    }
}

impl SearchRun for Bfs<'_> {
    fn stats(&self) -> SearchStats {
        self.s.stats
    }

    fn store(&self) -> &DecisionStore {
        &self.s.store
    }
}
