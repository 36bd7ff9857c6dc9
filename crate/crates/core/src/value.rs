//! Runtime value graph: head-normal forms extended with choices, failure
//! and constrained values; identifiers, decisions and constraints; and the
//! rendered form of extracted values.

use std::cell::{Cell, OnceCell, RefCell};
use std::fmt;
use std::rc::Rc;

use crate::error::EvalResult;
use crate::supply::{RawId, Supply};
use crate::syntax::core::{Callable, CtorId, Expr};

pub type Val = Rc<Node>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Choice,
    Free,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Id {
    pub raw: RawId,
    pub flavor: Flavor,
}

impl Id {
    pub fn choice(raw: RawId) -> Id {
        Id {
            raw,
            flavor: Flavor::Choice,
        }
    }

    pub fn free(raw: RawId) -> Id {
        Id {
            raw,
            flavor: Flavor::Free,
        }
    }

    pub fn narrow(&self) -> Id {
        Id::choice(self.raw.clone())
    }

    pub fn is_free(&self) -> bool {
        self.flavor == Flavor::Free
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flavor {
            Flavor::Choice => write!(f, "{}", self.raw),
            Flavor::Free => write!(f, "Free {}", self.raw),
        }
    }
}

/// A variable bound to an unevaluated expression by `=:<=`.
pub struct LazyBinding {
    /// The generator value of the variable (a free choice).
    pub var: Val,
    pub target: Val,
    /// Binding constraints computed on first demand.
    pub result: OnceCell<Val>,
}

#[derive(Clone)]
pub enum Decision {
    NoDecision,
    ChooseLeft,
    ChooseRight,
    BindTo(RawId),
    LazyBind(Rc<LazyBinding>),
}

impl Decision {
    pub fn is_concrete(&self) -> bool {
        matches!(self, Decision::ChooseLeft | Decision::ChooseRight)
    }
}

impl PartialEq for Decision {
    fn eq(&self, other: &Decision) -> bool {
        match (self, other) {
            (Decision::NoDecision, Decision::NoDecision)
            | (Decision::ChooseLeft, Decision::ChooseLeft)
            | (Decision::ChooseRight, Decision::ChooseRight) => true,
            (Decision::BindTo(a), Decision::BindTo(b)) => a == b,
            (Decision::LazyBind(a), Decision::LazyBind(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::NoDecision => write!(f, "NoDecision"),
            Decision::ChooseLeft => write!(f, "ChooseLeft"),
            Decision::ChooseRight => write!(f, "ChooseRight"),
            Decision::BindTo(j) => write!(f, "BindTo {j}"),
            Decision::LazyBind(_) => write!(f, "LazyBind .."),
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct Constraint {
    pub id: RawId,
    pub decision: Decision,
}

impl Constraint {
    pub fn new(id: RawId, decision: Decision) -> Self {
        debug_assert!(decision != Decision::NoDecision);
        Constraint { id, decision }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :=: {:?}", self.id, self.decision)
    }
}

/// Head-normal forms. `Ctor(SUCCESS_CTOR, [])` is the solved constraint.
pub enum Hnf {
    Ctor(CtorId, Vec<Val>),
    Choice(Id, Val, Val),
    Fail,
    Guard(Rc<[Constraint]>, Val),
    Partial(Callable, Vec<Val>),
}

pub type HnfRef = Rc<Hnf>;

pub type Env = Rc<Vec<Option<Val>>>;

pub type Native = Rc<dyn Fn(&crate::eval::Machine) -> EvalResult<Val>>;

pub enum Thunk {
    Eval {
        expr: Rc<Expr>,
        env: Env,
        supply: Option<Supply>,
    },
    Native(Native),
}

impl Clone for Thunk {
    fn clone(&self) -> Self {
        match self {
            Thunk::Eval { expr, env, supply } => Thunk::Eval {
                expr: expr.clone(),
                env: env.clone(),
                supply: supply.clone(),
            },
            Thunk::Native(f) => Thunk::Native(f.clone()),
        }
    }
}

pub enum State {
    Ready(HnfRef),
    Pending(Thunk),
    /// Being evaluated; reaching it again means a value depends on itself.
    Forcing,
}

pub struct Node {
    pub state: RefCell<State>,
    /// Cached normal form, when normal-form memoization is on.
    pub nf: RefCell<Option<Val>>,
    pub forced: Cell<bool>,
}

impl Node {
    pub fn ready(h: Hnf) -> Val {
        Self::from_hnf(Rc::new(h))
    }

    pub fn from_hnf(h: HnfRef) -> Val {
        Rc::new(Node {
            state: RefCell::new(State::Ready(h)),
            nf: RefCell::new(None),
            forced: Cell::new(true),
        })
    }

    pub fn thunk(t: Thunk) -> Val {
        Rc::new(Node {
            state: RefCell::new(State::Pending(t)),
            nf: RefCell::new(None),
            forced: Cell::new(false),
        })
    }

    pub fn native(f: impl Fn(&crate::eval::Machine) -> EvalResult<Val> + 'static) -> Val {
        Self::thunk(Thunk::Native(Rc::new(f)))
    }

    pub fn ctor(c: CtorId, args: Vec<Val>) -> Val {
        Self::ready(Hnf::Ctor(c, args))
    }

    pub fn fail() -> Val {
        Self::ready(Hnf::Fail)
    }

    pub fn success() -> Val {
        Self::ready(Hnf::Ctor(crate::syntax::core::SUCCESS_CTOR, vec![]))
    }

    pub fn choice(id: Id, l: Val, r: Val) -> Val {
        Self::ready(Hnf::Choice(id, l, r))
    }

    pub fn guard(cs: Vec<Constraint>, v: Val) -> Val {
        debug_assert!(!cs.is_empty());
        Self::ready(Hnf::Guard(cs.into(), v))
    }

    /// The head-normal form if already computed.
    pub fn peek(&self) -> Option<HnfRef> {
        match &*self.state.borrow() {
            State::Ready(h) => Some(h.clone()),
            _ => None,
        }
    }
}

/// Long chains of evaluated nodes are dropped with a worklist instead of
/// recursively.
impl Drop for Node {
    fn drop(&mut self) {
        let mut todo = Vec::new();
        detach(self, &mut todo);
        while let Some(v) = todo.pop() {
            if let Ok(mut n) = Rc::try_unwrap(v) {
                detach(&mut n, &mut todo);
            }
        }
    }
}

fn detach(n: &mut Node, out: &mut Vec<Val>) {
    if let Some(v) = n.nf.get_mut().take() {
        out.push(v);
    }
    match std::mem::replace(n.state.get_mut(), State::Forcing) {
        State::Ready(h) => {
            if let Ok(h) = Rc::try_unwrap(h) {
                match h {
                    Hnf::Ctor(_, args) | Hnf::Partial(_, args) => out.extend(args),
                    Hnf::Choice(_, l, r) => out.extend([l, r]),
                    Hnf::Guard(_, v) => out.push(v),
                    Hnf::Fail => {}
                }
            }
        }
        State::Pending(Thunk::Eval { env, .. }) => {
            if let Ok(env) = Rc::try_unwrap(env) {
                out.extend(env.into_iter().flatten());
            }
        }
        State::Pending(Thunk::Native(_)) | State::Forcing => {}
    }
}

/// An extracted value in a form independent of the graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Ctor(String, Vec<Term>),
    /// Residual free variable, by representative identifier.
    Var(RawId),
    Partial(String, Vec<Term>),
}

impl Term {
    fn nat_value(&self) -> Option<u64> {
        let mut n = 0;
        let mut t = self;
        loop {
            match t {
                Term::Ctor(c, args) if c == "Z" && args.is_empty() => return Some(n),
                Term::Ctor(c, args) if c == "S" && args.len() == 1 => {
                    n += 1;
                    t = &args[0];
                }
                _ => return None,
            }
        }
    }

    /// Elements of a list spine, and its tail when not `Nil`.
    fn list_parts(&self) -> Option<(Vec<&Term>, Option<&Term>)> {
        let mut items = Vec::new();
        let mut t = self;
        loop {
            match t {
                Term::Ctor(c, args) if c == "Nil" && args.is_empty() => return Some((items, None)),
                Term::Ctor(c, args) if c == "Cons" && args.len() == 2 => {
                    items.push(&args[0]);
                    t = &args[1];
                }
                _ if items.is_empty() => return None,
                _ => return Some((items, Some(t))),
            }
        }
    }

    fn is_atomic(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Ctor(..) if self.nat_value().is_some() => true,
            Term::Ctor(..) if self.list_parts().is_some() => true,
            Term::Ctor(_, args) | Term::Partial(_, args) => args.is_empty(),
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atomic() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

/// Surface syntax: `True`, `_x2`, `[True,False]`, `(_x2:_x3)`, `3`,
/// `S _x4`, `Just (Just True)`. Lists with an open tail are always
/// parenthesized.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.nat_value() {
            return write!(f, "{n}");
        }
        if let Some((items, tail)) = self.list_parts() {
            return match tail {
                None => {
                    write!(f, "[")?;
                    for (k, t) in items.iter().enumerate() {
                        if k > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{t}")?;
                    }
                    write!(f, "]")
                }
                Some(tail) => {
                    write!(f, "(")?;
                    for t in items {
                        t.fmt_atom(f)?;
                        write!(f, ":")?;
                    }
                    tail.fmt_atom(f)?;
                    write!(f, ")")
                }
            };
        }
        match self {
            Term::Var(id) => write!(f, "_x{id}"),
            Term::Ctor(c, args) if c == "Nil" && args.is_empty() => write!(f, "[]"),
            Term::Ctor(c, args) | Term::Partial(c, args) => {
                write!(f, "{c}")?;
                for a in args {
                    write!(f, " ")?;
                    a.fmt_atom(f)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(name: &str, args: Vec<Term>) -> Term {
        Term::Ctor(name.into(), args)
    }

    #[test]
    fn narrow_flavors() {
        assert_eq!(Id::free(RawId::from(7)).narrow(), Id::choice(RawId::from(7)));
        assert_eq!(Id::choice(RawId::from(7)).narrow(), Id::choice(RawId::from(7)));
        let mut rng = rand::thread_rng();
        for _ in 0..100 {
            let raw = RawId::from(rng.gen::<u64>());
            assert_eq!(Id::free(raw.clone()).narrow().raw, raw);
        }
    }

    #[test]
    fn render() {
        assert_eq!(c("True", vec![]).to_string(), "True");
        assert_eq!(Term::Var(RawId::from(2)).to_string(), "_x2");
        let partial = c("Cons", vec![Term::Var(RawId::from(2)), Term::Var(RawId::from(3))]);
        assert_eq!(partial.to_string(), "(_x2:_x3)");
        let nested = c("Cons", vec![c("True", vec![]), c("Cons", vec![c("S", vec![Term::Var(RawId::from(6))]), Term::Var(RawId::from(7))])]);
        assert_eq!(nested.to_string(), "(True:(S _x6):_x7)");
        let list = c("Cons", vec![c("True", vec![]), c("Cons", vec![c("False", vec![]), c("Nil", vec![])])]);
        assert_eq!(list.to_string(), "[True,False]");
        assert_eq!(c("Nil", vec![]).to_string(), "[]");
        let two = c("S", vec![c("S", vec![c("Z", vec![])])]);
        assert_eq!(two.to_string(), "2");
        assert_eq!(c("S", vec![Term::Var(RawId::from(4))]).to_string(), "S _x4");
        assert_eq!(c("Just", vec![c("Just", vec![c("True", vec![])])]).to_string(), "Just (Just True)");
    }
}
