use super::*;

/// Iterative deepening over the number of branch decisions. Each round
/// doubles the bound and only reports results beyond the previous one.
pub struct Ids<'a> {
    round: Option<Dfs<'a>>,
    /// Kept between rounds.
    solver: Option<Solver<'a>>,
    lo: usize,
    hi: usize,
    done: bool,
}

impl<'a> Ids<'a> {
    pub fn new(s: Solver<'a>, initial_depth: usize) -> Self {
        Ids {
            round: Some(Dfs::windowed(s, Some((0, initial_depth)))),
            solver: None,
            lo: 0,
            hi: initial_depth,
            done: false,
        }
    }
}

impl Iterator for Ids<'_> {
    type Item = SearchResult<ResultRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            let round = self.round.as_mut().expect("active round");
            match round.next() {
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(ok) => return Some(ok),
                None => {
                    let round = self.round.take().unwrap();
                    let cut = round.was_cut();
                    let s = round.into_solver();
                    if !cut {
                        self.solver = Some(s);
                        self.done = true;
                        return None;
                    }
                    self.lo = self.hi + 1;
                    self.hi = (2 * self.hi).max(1);
                    self.round = Some(Dfs::windowed(s, Some((self.lo, self.hi))));
                }
            }
        }
    }
}

impl SearchRun for Ids<'_> {
    fn stats(&self) -> SearchStats {
        match (&self.round, &self.solver) {
            (Some(r), _) => r.stats(),
            (None, Some(s)) => s.stats,
            _ => SearchStats::default(),
        }
    }

    fn store(&self) -> &DecisionStore {
        match (&self.round, &self.solver) {
            (Some(r), _) => r.store(),
            (None, Some(s)) => &s.store,
            _ => unreachable!(),
        }
    }
}
