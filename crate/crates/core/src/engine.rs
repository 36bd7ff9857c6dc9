//! Compiling programs and running queries against them.

use std::rc::Rc;

use thiserror::Error;

use crate::error::CompileError;
use crate::eval::{Machine, MachineOptions};
use crate::search::{ResultRecord, Results, SearchError, SearchStats, Solver, StrategyRegistry};
use crate::supply::init_supply;
use crate::syntax::core::CoreProgram;
use crate::syntax::desugar::compile_query;
use crate::syntax::parser::{parse_free_decls, parse_query};
use crate::syntax::compile_program;
use crate::value::Val;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("unknown strategy `{0}` (available: {1})")]
    UnknownStrategy(String, String),
}

pub struct Engine {
    pub prog: Rc<CoreProgram>,
    pub registry: StrategyRegistry,
}

impl Engine {
    pub fn load(src: &str, with_prelude: bool) -> Result<Engine, CompileError> {
        Ok(Engine {
            prog: Rc::new(compile_program(src, with_prelude)?),
            registry: StrategyRegistry::default(),
        })
    }

    /// Compiles `query`, with `extra_free` (e.g. `x, y :: Bool`) added to
    /// its free variables, and evaluates it lazily on a fresh machine.
    pub fn session(&self, query: &str, extra_free: Option<&str>, opts: MachineOptions) -> Result<Session, CompileError> {
        let mut q = parse_query(query)?;
        if let Some(extra) = extra_free {
            q.free.extend(parse_free_decls(extra)?);
        }
        let f = compile_query(&self.prog, &q)?;
        let machine = Machine::new(self.prog.clone(), opts);
        let (root, bindings) = machine.eval_query(&f, init_supply());
        Ok(Session { machine, root, bindings })
    }

    /// All results of `query` under the named strategy, with the final
    /// statistics.
    pub fn solve(&self, query: &str, strategy: &str, opts: MachineOptions) -> Result<(Vec<ResultRecord>, SearchStats), EngineError> {
        let session = self.session(query, None, opts)?;
        let mut run = session.run(&self.registry, strategy)?;
        let records = run.by_ref().collect::<Result<Vec<_>, _>>()?;
        let stats = run.stats();
        Ok((records, stats))
    }
}

/// A query evaluated on its own machine.
pub struct Session {
    pub machine: Machine,
    pub root: Val,
    pub bindings: Vec<(String, Val)>,
}

impl Session {
    pub fn solver(&self) -> Solver<'_> {
        Solver::new(&self.machine, self.root.clone(), self.bindings.clone())
    }

    pub fn run<'a>(&'a self, registry: &StrategyRegistry, strategy: &str) -> Result<Results<'a>, EngineError> {
        let s = registry.get(strategy).ok_or_else(|| {
            EngineError::UnknownStrategy(strategy.to_string(), registry.names().collect::<Vec<_>>().join(", "))
        })?;
        Ok(s.search(self.solver()))
    }
}
