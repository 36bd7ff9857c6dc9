//! Value extraction. A search configuration is a stack of tasks; expanding
//! it runs deterministically until it yields a result, dies, or reaches an
//! undecided choice. Strategies differ only in how they order the
//! alternatives of that choice.

mod bfs;
mod dfs;
mod ids;
mod registry;
mod render;
mod tree;

pub use bfs::Bfs;
pub use dfs::Dfs;
pub use ids::Ids;
pub use registry::{Strategy, StrategyRegistry};
pub use render::ResultRecord;
pub use tree::{collect_tree, SearchTree};

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::error::EvalError;
use crate::eval::Machine;
use crate::store::{Added, DecisionStore};
use crate::supply::RawId;
use crate::syntax::core::SUCCESS_CTOR;
use crate::value::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub choices: u64,
    pub failures: u64,
    pub guards: u64,
    pub forces: u64,
    /// Results whose path followed some identifier both ways. Only counted
    /// when auditing is on; always 0 for a correct engine.
    pub violations: u64,
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "choices={} failures={} guards={} forces={}",
            self.choices, self.failures, self.guards, self.forces
        )
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type SearchResult<T> = Result<T, SearchError>;

#[derive(Clone)]
pub(crate) enum Task {
    /// A `Success`-typed constraint to satisfy.
    Solve(Val),
    /// The main value, to be brought into normal form.
    Value(Val),
    /// A normal-form main value ready to be rendered.
    Emit(Val),
}

#[derive(Clone)]
pub(crate) struct Config {
    tasks: Vec<Task>,
    /// Decisions made at branch points on the path.
    depth: usize,
    /// Every choice passed on the path, for auditing.
    trace: Vec<(RawId, bool)>,
}

pub(crate) enum Step {
    Solution(ResultRecord),
    Dead,
    /// An undecided choice. The configuration holds the remaining tasks;
    /// one of the two alternatives goes on top.
    Branch(RawId, Task, Task),
}

/// A store mutation, recorded so that a path can be replayed.
#[derive(Clone)]
pub(crate) enum Op {
    Add(Vec<Constraint>),
    TakeLazy(RawId),
    Syncs,
}

pub struct Solver<'a> {
    pub m: &'a Machine,
    pub store: DecisionStore,
    pub stats: SearchStats,
    root: Val,
    bindings: Rc<[(String, Val)]>,
    audit: bool,
    log: Option<Vec<Op>>,
}

impl<'a> Solver<'a> {
    /// `bindings` are the user's free variables, rendered with each result.
    pub fn new(m: &'a Machine, root: Val, bindings: Vec<(String, Val)>) -> Self {
        Solver {
            m,
            store: DecisionStore::new(),
            stats: SearchStats::default(),
            root,
            bindings: bindings.into(),
            audit: false,
            log: None,
        }
    }

    /// Check every result path for choices followed inconsistently.
    pub fn with_audit(mut self) -> Self {
        self.audit = true;
        self
    }

    pub(crate) fn initial(&self) -> Config {
        Config {
            tasks: vec![Task::Value(self.root.clone())],
            depth: 0,
            trace: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, on: bool) {
        self.log = on.then(Vec::new);
    }

    pub(crate) fn take_log(&mut self) -> Vec<Op> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub(crate) fn replay(&mut self, ops: &[Op]) {
        for op in ops {
            match op {
                Op::Add(cs) => {
                    self.store.add_constraints(cs);
                }
                Op::TakeLazy(i) => {
                    self.store.take_lazy(i);
                }
                Op::Syncs => {
                    self.store.take_pending_syncs();
                }
            }
        }
    }

    fn add(&mut self, cs: &[Constraint]) -> Added {
        let r = self.store.add_constraints(cs);
        if let (Some(log), true) = (&mut self.log, r.is_consistent()) {
            log.push(Op::Add(cs.to_vec()));
        }
        r
    }

    fn take_lazy(&mut self, i: &RawId) -> Option<Rc<LazyBinding>> {
        let p = self.store.take_lazy(i);
        if let (Some(log), true) = (&mut self.log, p.is_some()) {
            log.push(Op::TakeLazy(i.clone()));
        }
        p
    }

    /// Commits alternative `left`/right of the choice `id` and puts its
    /// task on top of `cfg`.
    pub(crate) fn descend(&mut self, cfg: &Config, id: &RawId, task: Task, left: bool) -> Config {
        let d = if left { Decision::ChooseLeft } else { Decision::ChooseRight };
        let ok = self.add(&[Constraint::new(id.clone(), d)]).is_consistent();
        debug_assert!(ok);
        let mut next = cfg.clone();
        next.tasks.push(task);
        next.depth += 1;
        if self.audit {
            next.trace.push((id.clone(), left));
        }
        next
    }

    fn force_binding(&mut self, p: &LazyBinding) -> SearchResult<Task> {
        let (v, first) = self.m.force_lazy_binding(p)?;
        if first {
            self.stats.forces += 1;
        }
        Ok(Task::Solve(v))
    }

    fn push_obligations(&mut self, tasks: &mut Vec<Task>, ps: Vec<Rc<LazyBinding>>) -> SearchResult<()> {
        for p in ps.iter().rev() {
            let t = self.force_binding(p)?;
            tasks.push(t);
        }
        Ok(())
    }

    /// Bound variables whose class got decided: unify the chosen
    /// alternatives of both generators.
    fn drain_syncs(&mut self, tasks: &mut Vec<Task>) -> SearchResult<()> {
        let syncs = self.store.take_pending_syncs();
        if syncs.is_empty() {
            return Ok(());
        }
        if let Some(log) = &mut self.log {
            log.push(Op::Syncs);
        }
        for (a, b, d) in syncs {
            let (x, y) = (self.branch_of(&a, &d)?, self.branch_of(&b, &d)?);
            tasks.push(Task::Solve(self.m.lift(&x, y, Machine::strict_unify)));
        }
        Ok(())
    }

    fn branch_of(&self, raw: &RawId, d: &Decision) -> SearchResult<Val> {
        match self.m.generator(raw).as_deref() {
            Some(Hnf::Choice(_, l, r)) => Ok(if *d == Decision::ChooseLeft { l.clone() } else { r.clone() }),
            _ => Err(SearchError::Internal(format!("no generator for variable {raw}"))),
        }
    }

    /// Decision-directed handling of `Choice id l r` found in task `wrap`.
    /// Returns a branch request when undecided.
    fn choose(
        &mut self,
        cfg: &mut Config,
        node: &Val,
        id: &Id,
        l: &Val,
        r: &Val,
        wrap: fn(Val) -> Task,
    ) -> SearchResult<Option<Step>> {
        self.stats.choices += 1;
        match self.store.lookup(&id.raw) {
            Decision::ChooseLeft => {
                self.trace(cfg, &id.raw, true);
                cfg.tasks.push(wrap(l.clone()));
            }
            Decision::ChooseRight => {
                self.trace(cfg, &id.raw, false);
                cfg.tasks.push(wrap(r.clone()));
            }
            Decision::LazyBind(_) => {
                let p = self.take_lazy(&id.raw).expect("lazy binding present");
                cfg.tasks.push(wrap(node.clone()));
                let t = self.force_binding(&p)?;
                cfg.tasks.push(t);
            }
            Decision::NoDecision => {
                return Ok(Some(Step::Branch(id.raw.clone(), wrap(l.clone()), wrap(r.clone()))));
            }
            Decision::BindTo(_) => unreachable!("lookup follows chains"),
        }
        Ok(None)
    }

    fn trace(&self, cfg: &mut Config, id: &RawId, left: bool) {
        if self.audit {
            cfg.trace.push((id.clone(), left));
        }
    }

    fn guard(&mut self, cfg: &mut Config, cs: &[Constraint], rest: Task) -> SearchResult<bool> {
        self.stats.guards += 1;
        match self.add(cs) {
            Added::Inconsistent => {
                self.stats.failures += 1;
                Ok(false)
            }
            Added::Consistent(ps) => {
                cfg.tasks.push(rest);
                self.push_obligations(&mut cfg.tasks, ps)?;
                Ok(true)
            }
        }
    }

    /// Runs `cfg` up to its next result, failure or undecided choice.
    pub(crate) fn expand(&mut self, cfg: &mut Config) -> SearchResult<Step> {
        loop {
            self.drain_syncs(&mut cfg.tasks)?;
            let Some(task) = cfg.tasks.pop() else {
                return Err(SearchError::Internal("search configuration without a value".into()));
            };
            match task {
                Task::Solve(v) => {
                    let h = self.m.force(&v)?;
                    match &*h {
                        Hnf::Ctor(SUCCESS_CTOR, _) => {}
                        Hnf::Fail => {
                            self.stats.failures += 1;
                            return Ok(Step::Dead);
                        }
                        Hnf::Guard(cs, w) => {
                            if !self.guard(cfg, cs, Task::Solve(w.clone()))? {
                                return Ok(Step::Dead);
                            }
                        }
                        Hnf::Choice(id, l, r) => {
                            if let Some(s) = self.choose(cfg, &v, id, l, r, Task::Solve)? {
                                return Ok(s);
                            }
                        }
                        Hnf::Ctor(..) | Hnf::Partial(..) => {
                            return Err(SearchError::Internal(format!(
                                "constraint evaluated to {}",
                                self.m.describe(&h)
                            )))
                        }
                    }
                }
                Task::Value(v) => {
                    let n = self.m.nf(&v)?;
                    let h = self.m.force(&n)?;
                    match &*h {
                        Hnf::Fail => {
                            self.stats.failures += 1;
                            return Ok(Step::Dead);
                        }
                        Hnf::Guard(cs, w) => {
                            if !self.guard(cfg, cs, Task::Value(w.clone()))? {
                                return Ok(Step::Dead);
                            }
                        }
                        Hnf::Choice(id, l, r) if !id.is_free() => {
                            if let Some(s) = self.choose(cfg, &n, id, l, r, Task::Value)? {
                                return Ok(s);
                            }
                        }
                        _ => cfg.tasks.push(Task::Emit(n)),
                    }
                }
                Task::Emit(v) => match self.render_result(&v)? {
                    Ok(rec) => {
                        if !cfg.tasks.is_empty() {
                            return Err(SearchError::Internal("result with unsolved constraints".into()));
                        }
                        let mut rec = rec;
                        if self.audit && !consistent(&cfg.trace) {
                            self.stats.violations += 1;
                        }
                        rec.stats = self.stats;
                        return Ok(Step::Solution(rec));
                    }
                    Err(raw) => {
                        let p = self.take_lazy(&raw).expect("lazy binding present");
                        cfg.tasks.push(Task::Emit(v));
                        let t = self.force_binding(&p)?;
                        cfg.tasks.push(t);
                    }
                },
            }
        }
    }
}

fn consistent(trace: &[(RawId, bool)]) -> bool {
    let mut seen: HashMap<&RawId, bool> = HashMap::new();
    trace.iter().all(|(i, d)| *seen.entry(i).or_insert(*d) == *d)
}

/// A running search: results on demand, plus access to the statistics
/// and the store.
pub trait SearchRun: Iterator<Item = SearchResult<ResultRecord>> {
    fn stats(&self) -> SearchStats;
    fn store(&self) -> &DecisionStore;
}

pub type Results<'a> = Box<dyn SearchRun + 'a>;
