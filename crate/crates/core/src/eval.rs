//! Lazy evaluation of core expressions to head normal form and normal form.
//!
//! Choices, failures and guards met while matching are lifted above the
//! match: a case on `Choice i l r` becomes `Choice (narrow i)` of the case
//! on each alternative, and the same holds for applications, conditions,
//! conjunctions and equations.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{EvalError, EvalResult};
use crate::supply::{RawId, Supply};
use crate::syntax::core::*;
use crate::value::*;

pub type TraceSink = Rc<dyn Fn(&str)>;

#[derive(Clone)]
pub struct MachineOptions {
    /// Share the head normal form of a suspension between its uses.
    pub memoize: bool,
    /// Upper bound on reduction steps over the machine's lifetime.
    pub step_limit: Option<u64>,
    /// Receives one line per computed head normal form.
    pub trace: Option<TraceSink>,
}

impl Default for MachineOptions {
    fn default() -> Self {
        MachineOptions {
            memoize: true,
            step_limit: None,
            trace: None,
        }
    }
}

pub struct Machine {
    pub prog: Rc<CoreProgram>,
    pub opts: MachineOptions,
    steps: Cell<u64>,
    /// Generator value of every logic variable created so far.
    registry: RefCell<HashMap<RawId, HnfRef>>,
}

const RED_ZONE: usize = 128 * 1024;
const STACK_CHUNK: usize = 32 * 1024 * 1024;

fn sub_supply(s: &Option<Supply>, slot: &SupplySlot) -> EvalResult<Option<Supply>> {
    match slot {
        SupplySlot::None => Ok(None),
        SupplySlot::Path(p) => match s {
            Some(s) => Ok(Some(s.follow(p))),
            None => Err(EvalError::Internal("consumer without identifier supply".into())),
        },
    }
}

impl Machine {
    pub fn new(prog: Rc<CoreProgram>, opts: MachineOptions) -> Self {
        Machine {
            prog,
            opts,
            steps: Cell::new(0),
            registry: RefCell::new(HashMap::new()),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps.get()
    }

    fn step(&self) -> EvalResult<()> {
        let n = self.steps.get() + 1;
        self.steps.set(n);
        match self.opts.step_limit {
            Some(limit) if n > limit => Err(EvalError::StepLimit(limit)),
            _ => Ok(()),
        }
    }

    /// The generator value registered for a logic variable.
    pub fn generator(&self, raw: &RawId) -> Option<HnfRef> {
        self.registry.borrow().get(raw).cloned()
    }

    pub fn register(&self, h: &HnfRef) {
        if let Hnf::Choice(id, ..) = &**h {
            if id.is_free() {
                self.registry.borrow_mut().entry(id.raw.clone()).or_insert_with(|| h.clone());
            }
        }
    }

    /// Suspends `e`; variables are shared rather than re-wrapped.
    pub fn delay(&self, e: &Rc<Expr>, env: &Env, s: &Option<Supply>) -> Val {
        match &**e {
            Expr::Var(slot) => env[*slot].clone().expect("bound variable"),
            Expr::Ctor(c, args) if args.is_empty() => Node::ctor(*c, vec![]),
            Expr::Fail => Node::fail(),
            _ => Node::thunk(Thunk::Eval {
                expr: e.clone(),
                env: env.clone(),
                supply: s.clone(),
            }),
        }
    }

    /// Head normal form of a value.
    pub fn force(&self, v: &Val) -> EvalResult<HnfRef> {
        let thunk = match &*v.state.borrow() {
            State::Ready(h) => return Ok(h.clone()),
            State::Forcing => return Err(EvalError::BlackHole),
            State::Pending(t) => t.clone(),
        };
        if self.opts.memoize {
            *v.state.borrow_mut() = State::Forcing;
        }
        let result = stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || match &thunk {
            Thunk::Eval { expr, env, supply } => self.eval(expr.clone(), env.clone(), supply.clone()),
            Thunk::Native(f) => f(self).and_then(|w| self.force(&w)),
        });
        match result {
            Ok(h) => {
                if let Some(sink) = &self.opts.trace {
                    sink(&format!("{} {}", self.steps(), self.describe(&h)));
                }
                if self.opts.memoize {
                    *v.state.borrow_mut() = State::Ready(h.clone());
                }
                v.forced.set(true);
                Ok(h)
            }
            Err(e) => {
                if self.opts.memoize {
                    *v.state.borrow_mut() = State::Pending(thunk);
                }
                Err(e)
            }
        }
    }

    /// One-line summary of a head normal form, as used in traces.
    pub fn describe(&self, h: &Hnf) -> String {
        match h {
            Hnf::Ctor(c, args) => format!("{}/{}", self.prog.ctor(*c).name, args.len()),
            Hnf::Choice(id, ..) => format!("Choice {id:?}"),
            Hnf::Fail => "Fail".to_string(),
            Hnf::Guard(cs, _) => format!("Guard {cs:?}"),
            Hnf::Partial(t, args) => format!("Partial {}/{}", self.prog.callable_name(*t), args.len()),
        }
    }

    fn frame(&self, f: FuncId, args: Vec<Val>) -> Env {
        let func = self.prog.func(f);
        let mut env: Vec<Option<Val>> = Vec::with_capacity(func.slots);
        env.extend(args.into_iter().map(Some));
        env.resize(func.slots.max(env.len()), None);
        Rc::new(env)
    }

    /// Evaluates a saturated call.
    pub fn call(&self, f: FuncId, args: Vec<Val>, s: Option<Supply>) -> EvalResult<HnfRef> {
        let func = self.prog.func(f);
        let s = if func.needs_supply { s } else { None };
        self.eval(func.body.clone(), self.frame(f, args), s)
    }

    /// Suspended saturated call.
    pub fn call_node(&self, f: FuncId, args: Vec<Val>, s: Option<Supply>) -> Val {
        let func = self.prog.func(f);
        let s = if func.needs_supply { s } else { None };
        Node::thunk(Thunk::Eval {
            expr: func.body.clone(),
            env: self.frame(f, args),
            supply: s,
        })
    }

    fn eval(&self, mut e: Rc<Expr>, mut env: Env, mut s: Option<Supply>) -> EvalResult<HnfRef> {
        loop {
            self.step()?;
            match &*e {
                Expr::Var(slot) => {
                    let v = env[*slot].clone().ok_or_else(|| EvalError::Internal("unbound slot".into()))?;
                    return self.force(&v);
                }
                Expr::Fail => return Ok(Rc::new(Hnf::Fail)),
                Expr::Ctor(c, args) => {
                    let args = args.iter().map(|a| self.delay(a, &env, &s)).collect();
                    return Ok(Rc::new(Hnf::Ctor(*c, args)));
                }
                Expr::Partial { target, args } => {
                    let args = args.iter().map(|a| self.delay(a, &env, &s)).collect();
                    return Ok(Rc::new(Hnf::Partial(*target, args)));
                }
                Expr::Call { func, args, supply } => {
                    let vals = args.iter().map(|a| self.delay(a, &env, &s)).collect();
                    let callee = self.prog.func(*func);
                    let s2 = if callee.needs_supply { sub_supply(&s, supply)? } else { None };
                    env = self.frame(*func, vals);
                    e = callee.body.clone();
                    s = s2;
                }
                Expr::Apply { func, args, supply } => {
                    let fv = self.delay(func, &env, &s);
                    let vals: Vec<Val> = args.iter().map(|a| self.delay(a, &env, &s)).collect();
                    let s2 = sub_supply(&s, supply)?;
                    let h = self.force(&fv)?;
                    match &*h {
                        Hnf::Partial(Callable::Func(f), pargs) if pargs.len() + vals.len() == self.prog.func(*f).arity => {
                            let all = pargs.iter().cloned().chain(vals).collect();
                            let callee = self.prog.func(*f);
                            env = self.frame(*f, all);
                            e = callee.body.clone();
                            s = if callee.needs_supply { s2 } else { None };
                        }
                        _ => return self.apply_hnf(h, vals, s2),
                    }
                }
                Expr::Case { scrutinee, branches } => {
                    let v = env[*scrutinee].clone().ok_or_else(|| EvalError::Internal("unbound slot".into()))?;
                    let h = self.force(&v)?;
                    match &*h {
                        Hnf::Ctor(c, fields) => match branches.iter().find(|b| b.ctor == *c) {
                            Some(b) => {
                                let frame = Rc::make_mut(&mut env);
                                for (slot, f) in b.binders.iter().zip(fields) {
                                    frame[*slot] = Some(f.clone());
                                }
                                e = b.body.clone();
                            }
                            None => return Ok(Rc::new(Hnf::Fail)),
                        },
                        Hnf::Choice(id, l, r) => {
                            let rebind = |alt: &Val| {
                                let mut env2 = env.clone();
                                Rc::make_mut(&mut env2)[*scrutinee] = Some(alt.clone());
                                Node::thunk(Thunk::Eval {
                                    expr: e.clone(),
                                    env: env2,
                                    supply: s.clone(),
                                })
                            };
                            return Ok(Rc::new(Hnf::Choice(id.narrow(), rebind(l), rebind(r))));
                        }
                        Hnf::Guard(cs, w) => {
                            let mut env2 = env.clone();
                            Rc::make_mut(&mut env2)[*scrutinee] = Some(w.clone());
                            let inner = Node::thunk(Thunk::Eval {
                                expr: e.clone(),
                                env: env2,
                                supply: s.clone(),
                            });
                            return Ok(Rc::new(Hnf::Guard(cs.clone(), inner)));
                        }
                        Hnf::Fail | Hnf::Partial(..) => return Ok(Rc::new(Hnf::Fail)),
                    }
                }
                Expr::Choice { left, right, free, id } => {
                    let raw = match sub_supply(&s, id)? {
                        Some(sub) => sub.this_id(),
                        None => return Err(EvalError::Internal("choice without identifier".into())),
                    };
                    let id = if *free { Id::free(raw) } else { Id::choice(raw) };
                    let h = Rc::new(Hnf::Choice(id, self.delay(left, &env, &s), self.delay(right, &env, &s)));
                    self.register(&h);
                    return Ok(h);
                }
                Expr::Unify { lazy, left, right } => {
                    let l = self.delay(left, &env, &s);
                    let r = self.delay(right, &env, &s);
                    return if *lazy { self.lazy_unify(&l, &r) } else { self.strict_unify(&l, &r) };
                }
                Expr::And(l, r) => {
                    let l = self.delay(l, &env, &s);
                    let r = self.delay(r, &env, &s);
                    return self.conj(&l, &r);
                }
                Expr::Cond(c, body) => {
                    let cv = self.delay(c, &env, &s);
                    let h = self.force(&cv)?;
                    match &*h {
                        Hnf::Ctor(SUCCESS_CTOR, _) => e = body.clone(),
                        _ => {
                            let bv = self.delay(body, &env, &s);
                            return self.cond_hnf(h, bv);
                        }
                    }
                }
                Expr::Eq(l, r) => {
                    let l = self.delay(l, &env, &s);
                    let r = self.delay(r, &env, &s);
                    return self.equal(&l, &r);
                }
                Expr::Let { slot, value, body } | Expr::Free {
                    slot,
                    generator: value,
                    body,
                    ..
                } => {
                    let v = self.delay(value, &env, &s);
                    Rc::make_mut(&mut env)[*slot] = Some(v);
                    e = body.clone();
                }
            }
        }
    }

    /// Applies an evaluated function value to further arguments.
    fn apply_hnf(&self, h: HnfRef, args: Vec<Val>, s: Option<Supply>) -> EvalResult<HnfRef> {
        if args.is_empty() {
            if let Hnf::Partial(Callable::Func(f), pargs) = &*h {
                if pargs.len() == self.prog.func(*f).arity {
                    return self.call(*f, pargs.clone(), s);
                }
            }
            return Ok(h);
        }
        match &*h {
            Hnf::Partial(target, pargs) => {
                let arity = self.prog.callable_arity(*target);
                let mut all: Vec<Val> = pargs.iter().cloned().chain(args).collect();
                if all.len() < arity {
                    return Ok(Rc::new(Hnf::Partial(*target, all)));
                }
                match *target {
                    Callable::Ctor(c) if all.len() == arity => Ok(Rc::new(Hnf::Ctor(c, all))),
                    Callable::Ctor(c) => Err(EvalError::OverApplied(self.prog.ctor(c).name.clone())),
                    Callable::Func(f) if all.len() == arity => self.call(f, all, s),
                    Callable::Func(f) => {
                        let rest = all.split_off(arity);
                        let (s1, s2) = match &s {
                            Some(s) => (Some(s.left()), Some(s.right())),
                            None => (None, None),
                        };
                        let inner = self.call_node(f, all, s1);
                        self.apply_value(&inner, rest, s2)
                    }
                }
            }
            Hnf::Choice(id, l, r) => {
                let (l, r) = (l.clone(), r.clone());
                let (a1, a2) = (args.clone(), args);
                let (s1, s2) = (s.clone(), s);
                Ok(Rc::new(Hnf::Choice(
                    id.narrow(),
                    Node::native(move |m| m.apply_value(&l, a1.clone(), s1.clone()).map(Node::from_hnf)),
                    Node::native(move |m| m.apply_value(&r, a2.clone(), s2.clone()).map(Node::from_hnf)),
                )))
            }
            Hnf::Guard(cs, w) => {
                let w = w.clone();
                Ok(Rc::new(Hnf::Guard(
                    cs.clone(),
                    Node::native(move |m| m.apply_value(&w, args.clone(), s.clone()).map(Node::from_hnf)),
                )))
            }
            Hnf::Fail => Ok(h),
            Hnf::Ctor(c, _) => Err(EvalError::OverApplied(self.prog.ctor(*c).name.clone())),
        }
    }

    pub fn apply_value(&self, f: &Val, args: Vec<Val>, s: Option<Supply>) -> EvalResult<HnfRef> {
        let h = self.force(f)?;
        self.apply_hnf(h, args, s)
    }

    /// `cond c body` once `c` is evaluated.
    fn cond_hnf(&self, h: HnfRef, body: Val) -> EvalResult<HnfRef> {
        match &*h {
            Hnf::Ctor(SUCCESS_CTOR, _) => self.force(&body),
            Hnf::Choice(id, l, r) => Ok(Rc::new(Hnf::Choice(
                id.narrow(),
                self.lift(l, body.clone(), |m, c, b| m.cond(c, b)),
                self.lift(r, body, |m, c, b| m.cond(c, b)),
            ))),
            Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(w, body, |m, c, b| m.cond(c, b))))),
            _ => Ok(Rc::new(Hnf::Fail)),
        }
    }

    pub fn cond(&self, c: &Val, body: &Val) -> EvalResult<HnfRef> {
        let h = self.force(c)?;
        self.cond_hnf(h, body.clone())
    }

    /// Suspends a binary operation on `(a, b)`.
    pub fn lift(&self, a: &Val, b: Val, op: fn(&Machine, &Val, &Val) -> EvalResult<HnfRef>) -> Val {
        let a = a.clone();
        Node::native(move |m| op(m, &a, &b).map(Node::from_hnf))
    }

    /// Boolean structural equality, dispatched on the type of the left value.
    pub fn equal(&self, l: &Val, r: &Val) -> EvalResult<HnfRef> {
        let h = self.force(l)?;
        match &*h {
            Hnf::Ctor(c, _) => {
                let t = self.prog.ctor(*c).type_id;
                let f = *self
                    .prog
                    .equalities
                    .get(&t)
                    .ok_or_else(|| EvalError::Internal(format!("no equality for `{}`", self.prog.types[t].name)))?;
                let lv = Node::from_hnf(h.clone());
                self.call(f, vec![lv, r.clone()], None)
            }
            Hnf::Choice(id, a, b) => Ok(Rc::new(Hnf::Choice(
                id.narrow(),
                self.lift(a, r.clone(), Machine::equal),
                self.lift(b, r.clone(), Machine::equal),
            ))),
            Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(w, r.clone(), Machine::equal)))),
            Hnf::Fail => Ok(h),
            Hnf::Partial(..) => Err(EvalError::Internal("`==` applied to a function".into())),
        }
    }

    /// Normal form with choices, failures and guards pulled above
    /// constructors. Unnarrowed logic variables stay in place.
    pub fn nf(&self, v: &Val) -> EvalResult<Val> {
        if let Some(n) = v.nf.borrow().as_ref() {
            return Ok(n.clone());
        }
        let n = stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || self.nf_uncached(v))?;
        if self.opts.memoize {
            *v.nf.borrow_mut() = Some(n.clone());
        }
        Ok(n)
    }

    fn nf_uncached(&self, v: &Val) -> EvalResult<Val> {
        let h = self.force(v)?;
        let Hnf::Ctor(c, args) = &*h else {
            return Ok(Node::from_hnf(h));
        };
        if args.is_empty() {
            return Ok(Node::from_hnf(h));
        }
        let mut done: Vec<Val> = Vec::with_capacity(args.len());
        for (k, a) in args.iter().enumerate() {
            let n = self.nf(a)?;
            let nh = self.force(&n)?;
            let rebuild = |alt: &Val| {
                let mut fields = done.clone();
                fields.push(alt.clone());
                fields.extend(args[k + 1..].iter().cloned());
                let node = Node::ctor(*c, fields);
                Node::native(move |m| m.nf(&node))
            };
            let lifted = match &*nh {
                Hnf::Choice(id, l, r) if !id.is_free() => Node::choice(id.clone(), rebuild(l), rebuild(r)),
                Hnf::Fail => Node::fail(),
                Hnf::Guard(cs, w) => Node::from_hnf(Rc::new(Hnf::Guard(cs.clone(), rebuild(w)))),
                _ => {
                    done.push(n);
                    continue;
                }
            };
            return Ok(lifted);
        }
        Ok(Node::ctor(*c, done))
    }

    /// Evaluates a query body: returns the value together with the logic
    /// variables introduced by its leading `Free` nodes.
    pub fn eval_query(&self, q: &CoreFunc, s: Supply) -> (Val, Vec<(String, Val)>) {
        let mut env: Env = Rc::new(vec![None; q.slots]);
        let s = Some(s);
        let mut e = q.body.clone();
        let mut bindings = Vec::new();
        while let Expr::Free {
            slot,
            name,
            generator,
            body,
            ..
        } = &*e
        {
            let v = self.delay(generator, &env, &s);
            Rc::make_mut(&mut env)[*slot] = Some(v.clone());
            bindings.push((name.clone(), v));
            e = body.clone();
        }
        (self.delay(&e, &env, &s), bindings)
    }

    /// Fully evaluated structure of `v` in constructor syntax, e.g.
    /// `Choice 2 (Choice 2 False True) (Choice 2 True False)`. Stops at
    /// `depth` nested levels with `..`.
    pub fn dump(&self, v: &Val, depth: usize) -> EvalResult<String> {
        fn atom(m: &Machine, v: &Val, depth: usize) -> EvalResult<String> {
            let s = m.dump(v, depth)?;
            Ok(if s.contains(' ') { format!("({s})") } else { s })
        }
        if depth == 0 {
            return Ok("..".into());
        }
        let h = self.force(v)?;
        Ok(match &*h {
            Hnf::Ctor(c, args) => {
                let mut out = self.prog.ctor(*c).name.clone();
                for a in args {
                    out.push(' ');
                    out.push_str(&atom(self, a, depth - 1)?);
                }
                out
            }
            Hnf::Choice(id, l, r) => format!(
                "Choice {id:?} {} {}",
                atom(self, l, depth - 1)?,
                atom(self, r, depth - 1)?
            ),
            Hnf::Fail => "Fail".into(),
            Hnf::Guard(cs, w) => format!("Guard {cs:?} {}", atom(self, w, depth - 1)?),
            Hnf::Partial(t, args) => format!("Partial {} {}", self.prog.callable_name(*t), args.len()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supply::init_supply;
    use crate::syntax::compile_program;
    use crate::syntax::desugar::compile_query;
    use crate::syntax::parser::parse_query;

    fn machine(src: &str) -> Machine {
        Machine::new(Rc::new(compile_program(src, true).unwrap()), MachineOptions::default())
    }

    fn query(m: &Machine, q: &str) -> (Val, Vec<(String, Val)>) {
        let f = compile_query(&m.prog, &parse_query(q).unwrap()).unwrap();
        m.eval_query(&f, init_supply())
    }

    #[test]
    fn xor_self_golden_structure() {
        let m = machine("");
        let (v, _) = query(&m, "xorSelf aBool");
        assert_eq!(m.dump(&v, 10).unwrap(), "Choice 2 (Choice 2 False True) (Choice 2 True False)");
    }

    #[test]
    fn head_of_empty_fails() {
        let m = machine("");
        let (v, _) = query(&m, "head []");
        assert!(matches!(*m.force(&v).unwrap(), Hnf::Fail));
    }

    #[test]
    fn head_of_free_list_narrows() {
        let m = machine("");
        let (v, bs) = query(&m, "head xs where xs :: [Bool] free");
        let Hnf::Choice(id, l, r) = &*m.force(&v).unwrap() else { panic!() };
        assert_eq!(*id, Id::choice(RawId::from(1)));
        assert!(matches!(*m.force(l).unwrap(), Hnf::Fail));
        let Hnf::Choice(elem, ..) = &*m.force(r).unwrap() else { panic!() };
        assert_eq!(*elem, Id::free(RawId::from(2)));
        let Hnf::Choice(xs, ..) = &*m.force(&bs[0].1).unwrap() else { panic!() };
        assert_eq!(*xs, Id::free(RawId::from(1)));
    }

    #[test]
    fn nf_pulls_choices_out_of_constructors() {
        let m = machine("");
        let (v, _) = query(&m, "[True ? False]");
        let n = m.nf(&v).unwrap();
        assert_eq!(m.dump(&n, 10).unwrap(), "Choice 1 (Cons True Nil) (Cons False Nil)");
        let (v, _) = query(&m, "[failed, True]");
        assert!(matches!(*m.force(&m.nf(&v).unwrap()).unwrap(), Hnf::Fail));
        let (v, _) = query(&m, "[True, False]");
        assert_eq!(m.dump(&m.nf(&v).unwrap(), 10).unwrap(), "Cons True (Cons False Nil)");
    }

    #[test]
    fn higher_order_application() {
        let m = machine("");
        let (v, _) = query(&m, "map not [True]");
        assert_eq!(m.dump(&m.nf(&v).unwrap(), 10).unwrap(), "Cons False Nil");
        let (v, _) = query(&m, "(?) True False");
        assert!(matches!(*m.force(&v).unwrap(), Hnf::Choice(..)));
        let (v, _) = query(&m, "aBool");
        assert!(matches!(*m.force(&v).unwrap(), Hnf::Choice(..)));
    }

    #[test]
    fn laziness() {
        let m = Machine::new(
            Rc::new(compile_program("loop = loop", true).unwrap()),
            MachineOptions {
                step_limit: Some(10_000),
                ..MachineOptions::default()
            },
        );
        let (v, _) = query(&m, "head [True, loop]");
        assert!(matches!(&*m.force(&v).unwrap(), Hnf::Ctor(..)));
        let (v, _) = query(&m, "loop");
        assert!(matches!(m.force(&v), Err(EvalError::BlackHole) | Err(EvalError::StepLimit(_))));
    }

    #[test]
    fn memoization_shares_head_normal_forms() {
        let m = machine("");
        let (v, _) = query(&m, "not True");
        let a = m.force(&v).unwrap();
        let b = m.force(&v).unwrap();
        assert!(Rc::ptr_eq(&a, &b));
    }

    #[test]
    fn deterministic_structure() {
        let m1 = machine("");
        let m2 = Machine::new(
            Rc::new(compile_program("", true).unwrap()),
            MachineOptions {
                memoize: false,
                ..MachineOptions::default()
            },
        );
        for q in ["xorSelf aBool", "[aBool, aBool]", "nub [True, aBool]"] {
            let (v1, _) = query(&m1, q);
            let (v2, _) = query(&m2, q);
            assert_eq!(m1.dump(&v1, 12).unwrap(), m2.dump(&v2, 12).unwrap(), "{q}");
        }
    }
}
