use std::collections::BTreeMap;

use super::*;

pub trait Strategy {
    fn name(&self) -> &'static str;
    fn search<'a>(&self, s: Solver<'a>) -> Results<'a>;
}

struct DepthFirst;
struct BreadthFirst;
struct Deepening {
    initial_depth: usize,
}

impl Strategy for DepthFirst {
    fn name(&self) -> &'static str {
        "dfs"
    }

    fn search<'a>(&self, s: Solver<'a>) -> Results<'a> {
        Box::new(Dfs::new(s))
    }
}

impl Strategy for BreadthFirst {
    fn name(&self) -> &'static str {
        "bfs"
    }

    fn search<'a>(&self, s: Solver<'a>) -> Results<'a> {
        Box::new(Bfs::new(s))
    }
}

impl Strategy for Deepening {
    fn name(&self) -> &'static str {
        "ids"
    }

    fn search<'a>(&self, s: Solver<'a>) -> Results<'a> {
        Box::new(Ids::new(s, self.initial_depth))
    }
}

/// Search strategies by name.
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, Box<dyn Strategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, s: Box<dyn Strategy>) {
        self.entries.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Strategy> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for StrategyRegistry {
    /// `dfs`, `bfs` and `ids` (starting at depth 1).
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(DepthFirst));
        r.register(Box::new(BreadthFirst));
        r.register(Box::new(Deepening { initial_depth: 1 }));
        r
    }
}
