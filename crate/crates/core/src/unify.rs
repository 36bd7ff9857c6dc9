//! Equational constraints: strict unification `=:=`, lazy unification
//! `=:<=` and conjunction `&`. Results are `Success`-typed values; bindings
//! of logic variables are carried as guard constraints.

use std::cell::OnceCell;
use std::rc::Rc;

use crate::error::EvalResult;
use crate::eval::Machine;
use crate::syntax::core::{CtorId, SUCCESS_CTOR};
use crate::value::*;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Lazy,
}

impl Mode {
    fn op(self) -> fn(&Machine, &Val, &Val) -> EvalResult<HnfRef> {
        match self {
            Mode::Strict => Machine::strict_unify,
            Mode::Lazy => Machine::lazy_unify,
        }
    }
}

fn success() -> HnfRef {
    Rc::new(Hnf::Ctor(SUCCESS_CTOR, vec![]))
}

fn fail() -> HnfRef {
    Rc::new(Hnf::Fail)
}

fn guarded(cs: Vec<Constraint>, v: Val) -> HnfRef {
    debug_assert!(!cs.is_empty());
    Rc::new(Hnf::Guard(cs.into(), v))
}

impl Machine {
    pub fn strict_unify(&self, a: &Val, b: &Val) -> EvalResult<HnfRef> {
        self.unify(a, b, Mode::Strict)
    }

    /// `a =:<= b` with `a` the pattern side: logic variables in `a` are
    /// bound to `b`'s subterms without evaluating them.
    pub fn lazy_unify(&self, a: &Val, b: &Val) -> EvalResult<HnfRef> {
        self.unify(a, b, Mode::Lazy)
    }

    fn unify(&self, a: &Val, b: &Val, mode: Mode) -> EvalResult<HnfRef> {
        let op = mode.op();
        let ha = self.force(a)?;
        match &*ha {
            Hnf::Fail => Ok(fail()),
            Hnf::Choice(i, l, r) if !i.is_free() => Ok(Rc::new(Hnf::Choice(
                i.clone(),
                self.lift(l, b.clone(), op),
                self.lift(r, b.clone(), op),
            ))),
            Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(w, b.clone(), op)))),
            Hnf::Choice(i, ..) if mode == Mode::Lazy => {
                let binding = LazyBinding {
                    var: Node::from_hnf(ha.clone()),
                    target: b.clone(),
                    result: OnceCell::new(),
                };
                let c = Constraint::new(i.raw.clone(), Decision::LazyBind(Rc::new(binding)));
                Ok(guarded(vec![c], Node::success()))
            }
            Hnf::Choice(i, ..) => {
                let hb = self.force(b)?;
                let a_node = Node::from_hnf(ha.clone());
                match &*hb {
                    Hnf::Fail => Ok(fail()),
                    Hnf::Choice(j, l, r) if !j.is_free() => Ok(Rc::new(Hnf::Choice(
                        j.clone(),
                        self.lift(&a_node, l.clone(), op),
                        self.lift(&a_node, r.clone(), op),
                    ))),
                    Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(&a_node, w.clone(), op)))),
                    Hnf::Choice(j, ..) => Ok(self.bind_vars(i, j)),
                    Hnf::Ctor(c, args) => self.bind_ctor(ha.clone(), *c, args, |g, x| (g, x), op),
                    Hnf::Partial(..) => Ok(fail()),
                }
            }
            Hnf::Ctor(c, xs) => {
                let hb = self.force(b)?;
                let a_node = Node::from_hnf(ha.clone());
                match &*hb {
                    Hnf::Fail => Ok(fail()),
                    Hnf::Choice(j, l, r) if !j.is_free() => Ok(Rc::new(Hnf::Choice(
                        j.clone(),
                        self.lift(&a_node, l.clone(), op),
                        self.lift(&a_node, r.clone(), op),
                    ))),
                    Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(&a_node, w.clone(), op)))),
                    Hnf::Choice(..) => self.bind_ctor(hb.clone(), *c, xs, |g, x| (x, g), op),
                    Hnf::Ctor(d, ys) if c == d => self.conj_all(xs.iter().cloned().zip(ys.iter().cloned()).collect(), op),
                    Hnf::Ctor(..) => Ok(fail()),
                    Hnf::Partial(..) => Ok(fail()),
                }
            }
            Hnf::Partial(..) => Ok(fail()),
        }
    }

    fn bind_vars(&self, i: &Id, j: &Id) -> HnfRef {
        if i.raw == j.raw {
            return success();
        }
        guarded(
            vec![Constraint::new(i.raw.clone(), Decision::BindTo(j.raw.clone()))],
            Node::success(),
        )
    }

    /// The decisions selecting constructor `c` in a generator value, and
    /// the generator values of its arguments.
    pub fn decision_path(&self, generator: HnfRef, c: CtorId) -> EvalResult<Option<(Vec<Constraint>, Vec<Val>)>> {
        let mut cs = Vec::new();
        let mut cur = generator;
        loop {
            match &*cur {
                Hnf::Choice(k, l, r) if k.is_free() => {
                    let left = self.force(l)?;
                    if let Hnf::Ctor(lc, args) = &*left {
                        if *lc == c {
                            cs.push(Constraint::new(k.raw.clone(), Decision::ChooseLeft));
                            return Ok(Some((cs, args.clone())));
                        }
                    }
                    cs.push(Constraint::new(k.raw.clone(), Decision::ChooseRight));
                    cur = self.force(r)?;
                }
                Hnf::Ctor(lc, args) if *lc == c => return Ok(Some((cs, args.clone()))),
                _ => return Ok(None),
            }
        }
    }

    /// Binds the logic variable whose generator value is `generator` to
    /// `c(args)`, unifying its argument generators with `args` via `op`.
    /// `orient` puts the pair in (pattern, actual) order.
    fn bind_ctor(
        &self,
        generator: HnfRef,
        c: CtorId,
        args: &[Val],
        orient: fn(Val, Val) -> (Val, Val),
        op: fn(&Machine, &Val, &Val) -> EvalResult<HnfRef>,
    ) -> EvalResult<HnfRef> {
        let Some((cs, gen_args)) = self.decision_path(generator, c)? else {
            return Ok(fail());
        };
        let pairs = gen_args.into_iter().zip(args.iter().cloned()).map(|(g, x)| orient(g, x)).collect();
        if cs.is_empty() {
            return self.conj_all(pairs, op);
        }
        let rest = if args.is_empty() {
            Node::success()
        } else {
            let m_pairs: Vec<(Val, Val)> = pairs;
            Node::native(move |m| m.conj_all(m_pairs.clone(), op).map(Node::from_hnf))
        };
        Ok(guarded(cs, rest))
    }

    /// Left-to-right conjunction of `op` over pairs.
    fn conj_all(&self, pairs: Vec<(Val, Val)>, op: fn(&Machine, &Val, &Val) -> EvalResult<HnfRef>) -> EvalResult<HnfRef> {
        let mut iter = pairs.into_iter().rev();
        let Some((x, y)) = iter.next() else {
            return Ok(success());
        };
        let mut acc = self.lift(&x, y, op);
        for (x, y) in iter {
            let first = self.lift(&x, y, op);
            let rest = acc;
            acc = Node::native(move |m| m.conj(&first, &rest).map(Node::from_hnf));
        }
        self.force(&acc)
    }

    /// `a & b`.
    pub fn conj(&self, a: &Val, b: &Val) -> EvalResult<HnfRef> {
        let ha = self.force(a)?;
        match &*ha {
            Hnf::Ctor(SUCCESS_CTOR, _) => self.force(b),
            Hnf::Fail => Ok(ha),
            Hnf::Choice(i, l, r) => Ok(Rc::new(Hnf::Choice(
                i.narrow(),
                self.lift(l, b.clone(), Machine::conj),
                self.lift(r, b.clone(), Machine::conj),
            ))),
            Hnf::Guard(cs, w) => {
                let solved = matches!(w.peek().as_deref(), Some(Hnf::Ctor(SUCCESS_CTOR, _)));
                if !solved {
                    return Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(w, b.clone(), Machine::conj))));
                }
                let hb = self.force(b)?;
                match &*hb {
                    Hnf::Fail => Ok(hb),
                    Hnf::Guard(cs2, w2) => {
                        let all: Vec<Constraint> = cs.iter().chain(cs2.iter()).cloned().collect();
                        Ok(guarded(all, w2.clone()))
                    }
                    // Distributed so that the guards below the choice merge.
                    Hnf::Choice(j, l, r) => Ok(Rc::new(Hnf::Choice(
                        j.clone(),
                        self.lift(a, l.clone(), Machine::conj),
                        self.lift(a, r.clone(), Machine::conj),
                    ))),
                    _ => Ok(Rc::new(Hnf::Guard(cs.clone(), Node::from_hnf(hb)))),
                }
            }
            Hnf::Ctor(..) | Hnf::Partial(..) => Ok(fail()),
        }
    }

    /// The binding constraints of a variable bound lazily to `target`,
    /// computed once the variable's value is needed.
    pub fn lazy_bind(&self, var: &Val, target: &Val) -> EvalResult<HnfRef> {
        let hv = self.force(var)?;
        let ht = self.force(target)?;
        match &*ht {
            Hnf::Fail => Ok(fail()),
            Hnf::Choice(j, l, r) if !j.is_free() => Ok(Rc::new(Hnf::Choice(
                j.clone(),
                self.lift(var, l.clone(), Machine::lazy_bind),
                self.lift(var, r.clone(), Machine::lazy_bind),
            ))),
            Hnf::Guard(cs, w) => Ok(Rc::new(Hnf::Guard(cs.clone(), self.lift(var, w.clone(), Machine::lazy_bind)))),
            Hnf::Choice(j, ..) => match &*hv {
                Hnf::Choice(i, ..) => Ok(self.bind_vars(i, j)),
                // A variable of a one-constructor type has no identifier;
                // bind the other side to it instead.
                Hnf::Ctor(c, args) => self.bind_ctor(ht.clone(), *c, args, |g, x| (x, g), Machine::lazy_unify),
                _ => Ok(fail()),
            },
            Hnf::Ctor(c, args) => self.bind_ctor(hv, *c, args, |g, x| (g, x), Machine::lazy_unify),
            Hnf::Partial(..) => Ok(fail()),
        }
    }

    /// Forces a lazy binding once; later calls return the same value.
    pub fn force_lazy_binding(&self, b: &LazyBinding) -> EvalResult<(Val, bool)> {
        if let Some(v) = b.result.get() {
            return Ok((v.clone(), false));
        }
        let h = self.lazy_bind(&b.var, &b.target)?;
        let v = Node::from_hnf(h);
        let _ = b.result.set(v.clone());
        Ok((v, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::MachineOptions;
    use crate::supply::init_supply;
    use crate::syntax::compile_program;
    use crate::syntax::desugar::compile_query;
    use crate::syntax::parser::parse_query;

    fn run(src: &str, q: &str) -> String {
        let m = Machine::new(Rc::new(compile_program(src, true).unwrap()), MachineOptions::default());
        let f = compile_query(&m.prog, &parse_query(q).unwrap()).unwrap();
        let (v, _) = m.eval_query(&f, init_supply());
        m.dump(&v, 12).unwrap()
    }

    #[test]
    fn ground_terms() {
        assert_eq!(run("", "True =:= True"), "Success");
        assert_eq!(run("", "True =:= False"), "Fail");
        assert_eq!(run("", "[True, False] =:= [True, False]"), "Success");
        assert_eq!(run("", "[True] =:= [True, False]"), "Fail");
        assert_eq!(run("", "failed =:= True"), "Fail");
        assert_eq!(run("", "True =:= failed"), "Fail");
    }

    #[test]
    fn free_against_constructor() {
        let s = run("", "x =:= True where x :: Bool free");
        assert!(s.starts_with("Guard [") && s.ends_with(":=: ChooseLeft] Success"), "{s}");
        let s = run("", "False =:= x where x :: Bool free");
        assert!(s.ends_with(":=: ChooseRight] Success"), "{s}");
    }

    #[test]
    fn free_against_free() {
        assert_eq!(run("", "x =:= x where x :: Bool free"), "Success");
        let s = run("", "x =:= y where x, y :: Bool free");
        assert!(s.contains(":=: BindTo "), "{s}");
    }

    #[test]
    fn choices_are_lifted() {
        let s = run("", "(True ? False) =:= True");
        assert_eq!(s, "Choice 1 Success Fail");
        let s = run("", "True =:= (True ? False)");
        assert_eq!(s, "Choice 1 Success Fail");
    }

    #[test]
    fn lazy_binding_is_deferred() {
        let s = run("", "x =:<= failed where x :: Bool free");
        assert!(s.contains(":=: LazyBind ..] Success"), "{s}");
        assert_eq!(run("", "True =:<= True"), "Success");
        assert_eq!(run("", "True =:<= False"), "Fail");
    }

    #[test]
    fn conjunction() {
        assert_eq!(run("", "success & success"), "Success");
        assert_eq!(run("", "success & failed"), "Fail");
        let s = run("", "x =:= True & y =:= False where x, y :: Bool free");
        assert_eq!(s, "Guard [2 :=: ChooseLeft] (Guard [3 :=: ChooseRight] Success)");
    }

    #[test]
    fn lazy_trace_with_generators_at_fixed_supplies() {
        use crate::supply::{Dir, IntegerSupply};
        use crate::syntax::core::Callable;
        use crate::syntax::desugar::generator_name;

        let m = Machine::new(Rc::new(compile_program("", true).unwrap()), MachineOptions::default());
        let p = &m.prog;
        let f = |n: &str| p.func_named(n).unwrap();
        let c = |n: &str| p.ctor_named(n).unwrap();
        let root = IntegerSupply::root();
        let bool_gen = Node::ready(Hnf::Partial(Callable::Func(f(&generator_name("Bool"))), vec![]));
        let xs = m.call_node(f(&generator_name("List")), vec![bool_gen], Some(root.left()));
        let e = m.call_node(f(&generator_name("Bool")), vec![], Some(root.right()));
        let nil = || Node::ctor(c("Nil"), vec![]);
        let lhs = m.call_node(f("++"), vec![xs, Node::ctor(c("Cons"), vec![e, nil()])], Some(root.follow(&[Dir::Right; 8])));
        let rhs = Node::ctor(
            c("Cons"),
            vec![Node::fail(), Node::ctor(c("Cons"), vec![Node::ctor(c("True"), vec![]), nil()])],
        );
        let v = Node::from_hnf(m.lazy_unify(&lhs, &rhs).unwrap());
        let s = m.dump(&v, 20).unwrap();
        assert!(s.contains("(Guard [4 :=: LazyBind .., 3 :=: LazyBind ..] Success)"), "{s}");
    }
}
