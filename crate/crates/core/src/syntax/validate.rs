//! Well-formedness checks on core programs.

use std::collections::HashSet;
use std::fmt;

use crate::syntax::core::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub func: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in `{}`: {}", self.func, self.message)
    }
}

pub fn validate(p: &CoreProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for func in &p.funcs {
        validate_func(p, func, &mut out);
    }
    out
}

pub fn validate_func(p: &CoreProgram, func: &CoreFunc, out: &mut Vec<Diagnostic>) {
    let mut bound: HashSet<Slot> = (0..func.arity).collect();
    let mut cx = Checker {
        p,
        func,
        out,
    };
    cx.expr(&func.body, &mut bound);
}

struct Checker<'a> {
    p: &'a CoreProgram,
    func: &'a CoreFunc,
    out: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, message: String) {
        self.out.push(Diagnostic {
            func: self.func.name.clone(),
            message,
        });
    }

    fn slot(&mut self, s: Slot, bound: &HashSet<Slot>) {
        if !bound.contains(&s) {
            self.report(format!("unbound variable slot {s}"));
        } else if s >= self.func.slots {
            self.report(format!("slot {s} exceeds the frame size {}", self.func.slots));
        }
    }

    fn under(&mut self, slots: &[Slot], e: &Expr, bound: &mut HashSet<Slot>) {
        let fresh: Vec<Slot> = slots.iter().copied().filter(|s| bound.insert(*s)).collect();
        for &s in slots {
            if s >= self.func.slots {
                self.report(format!("slot {s} exceeds the frame size {}", self.func.slots));
            }
        }
        self.expr(e, bound);
        for s in fresh {
            bound.remove(&s);
        }
    }

    fn expr(&mut self, e: &Expr, bound: &mut HashSet<Slot>) {
        match e {
            Expr::Var(s) => self.slot(*s, bound),
            Expr::Fail => {}
            Expr::Ctor(c, args) => {
                match self.p.ctors.get(*c) {
                    None => self.report(format!("unknown constructor id {c}")),
                    Some(info) if info.arity() != args.len() => self.report(format!(
                        "constructor `{}` has arity {} but is applied to {} arguments",
                        info.name,
                        info.arity(),
                        args.len()
                    )),
                    _ => {}
                }
                args.iter().for_each(|a| self.expr(a, bound));
            }
            Expr::Call { func, args, .. } => {
                match self.p.funcs.get(*func) {
                    None => self.report(format!("unknown function id {func}")),
                    Some(f) if f.arity != args.len() => self.report(format!(
                        "call of `{}` with {} arguments, arity is {}",
                        f.name,
                        args.len(),
                        f.arity
                    )),
                    _ => {}
                }
                args.iter().for_each(|a| self.expr(a, bound));
            }
            Expr::Partial { target, args } => {
                let known = match target {
                    Callable::Func(f) => *f < self.p.funcs.len(),
                    Callable::Ctor(c) => *c < self.p.ctors.len(),
                };
                if !known {
                    self.report("partial application of an unknown target".into());
                } else if args.len() > self.p.callable_arity(*target) {
                    self.report(format!(
                        "partial application of `{}` to too many arguments",
                        self.p.callable_name(*target)
                    ));
                }
                args.iter().for_each(|a| self.expr(a, bound));
            }
            Expr::Apply { func, args, .. } => {
                self.expr(func, bound);
                args.iter().for_each(|a| self.expr(a, bound));
            }
            Expr::Case { scrutinee, branches } => {
                self.slot(*scrutinee, bound);
                if branches.is_empty() {
                    self.report("case without branches".into());
                }
                let mut seen = HashSet::new();
                let mut ty = None;
                for b in branches {
                    let Some(info) = self.p.ctors.get(b.ctor) else {
                        self.report(format!("unknown constructor id {}", b.ctor));
                        continue;
                    };
                    match ty {
                        None => ty = Some(info.type_id),
                        Some(t) if t != info.type_id => self.report(format!(
                            "case branch for `{}` of type `{}` among branches of type `{}`",
                            info.name, self.p.types[info.type_id].name, self.p.types[t].name
                        )),
                        _ => {}
                    }
                    if !seen.insert(b.ctor) {
                        self.report(format!("two case branches for `{}`", info.name));
                    }
                    if b.binders.len() != info.arity() {
                        self.report(format!(
                            "branch for `{}` binds {} variables, arity is {}",
                            info.name,
                            b.binders.len(),
                            info.arity()
                        ));
                    }
                    self.under(&b.binders, &b.body, bound);
                }
            }
            Expr::Choice { left, right, .. }
            | Expr::Unify { left, right, .. }
            | Expr::And(left, right)
            | Expr::Cond(left, right)
            | Expr::Eq(left, right) => {
                self.expr(left, bound);
                self.expr(right, bound);
            }
            Expr::Let { slot, value, body } => {
                self.expr(value, bound);
                self.under(&[*slot], body, bound);
            }
            Expr::Free {
                slot, generator, body, ..
            } => {
                self.expr(generator, bound);
                self.under(&[*slot], body, bound);
            }
        }
    }
}
