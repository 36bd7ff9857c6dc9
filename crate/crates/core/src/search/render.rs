//! Turning a solved value into a term under the current decisions.

use std::fmt;

use super::{SearchError, SearchResult, SearchStats, Solver};
use crate::supply::RawId;
use crate::value::*;

const RED_ZONE: usize = 64 * 1024;
const STACK_CHUNK: usize = 2 * 1024 * 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub value: Term,
    /// The user's free variables in declaration order.
    pub bindings: Vec<(String, Term)>,
    pub stats: SearchStats,
}

/// `{xs = (_x2:_x3)} _x2`, or just the value without free variables.
impl fmt::Display for ResultRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bindings.is_empty() {
            write!(f, "{{")?;
            for (k, (name, t)) in self.bindings.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{name} = {t}")?;
            }
            write!(f, "}} ")?;
        }
        write!(f, "{}", self.value)
    }
}

/// `Err(raw)`: the variable `raw` is lazily bound and must be forced first.
type Rendered = Result<Term, RawId>;

impl Solver<'_> {
    pub(crate) fn render_result(&mut self, v: &Val) -> SearchResult<Result<ResultRecord, RawId>> {
        let value = match self.render(v)? {
            Ok(t) => t,
            Err(raw) => return Ok(Err(raw)),
        };
        let mut bindings = Vec::with_capacity(self.bindings.len());
        for (name, b) in self.bindings.clone().iter() {
            match self.render(b)? {
                Ok(t) => bindings.push((name.clone(), t)),
                Err(raw) => return Ok(Err(raw)),
            }
        }
        Ok(Ok(ResultRecord {
            value,
            bindings,
            stats: self.stats,
        }))
    }

    fn render(&self, v: &Val) -> SearchResult<Rendered> {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.render_uncached(v))
    }

    fn render_uncached(&self, v: &Val) -> SearchResult<Rendered> {
        let n = self.m.nf(v)?;
        let h = self.m.force(&n)?;
        match &*h {
            Hnf::Ctor(c, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args {
                    match self.render(a)? {
                        Ok(t) => ts.push(t),
                        e => return Ok(e),
                    }
                }
                Ok(Ok(Term::Ctor(self.m.prog.ctor(*c).name.clone(), ts)))
            }
            Hnf::Partial(t, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args {
                    match self.render(a)? {
                        Ok(t) => ts.push(t),
                        e => return Ok(e),
                    }
                }
                Ok(Ok(Term::Partial(self.m.prog.callable_name(*t).to_string(), ts)))
            }
            Hnf::Choice(id, l, r) => match self.store.lookup(&id.raw) {
                Decision::ChooseLeft => self.render(l),
                Decision::ChooseRight => self.render(r),
                Decision::LazyBind(_) => Ok(Err(id.raw.clone())),
                Decision::NoDecision if id.is_free() => Ok(Ok(Term::Var(self.store.find(&id.raw)))),
                _ => Err(SearchError::Internal(format!("undecided choice {id:?} in a result"))),
            },
            Hnf::Fail | Hnf::Guard(..) => Err(SearchError::Internal(format!(
                "{} in a result",
                self.m.describe(&h)
            ))),
        }
    }
}
