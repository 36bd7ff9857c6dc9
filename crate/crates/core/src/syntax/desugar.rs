//! Lowering of surface programs to the core IR.
//!
//! Rules of a function are compiled left to right into case trees that
//! scrutinize one variable at a time. When a run of rows cannot be split on
//! a single column the alternatives are joined by a choice, so rule order
//! becomes left/right order.
//!
//! Each function body receives one identifier supply. The first choice of
//! the body (in pre-order) takes the supply's own identifier; the remaining
//! consumers (calls of supply-taking functions, higher-order applications
//! and further choices) get disjoint sub-supplies in post-order, left to
//! right: `left`, `left.right`, ..., `right^(m-1)`. A single consumer with
//! no choice present takes the whole supply.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::error::CompileError;
use crate::supply::Dir;
use crate::syntax::ast::*;
use crate::syntax::core::*;

pub const QUERY_NAME: &str = "query@";

pub fn generator_name(ty: &str) -> String {
    format!("gen@{ty}")
}

pub fn equality_name(ty: &str) -> String {
    format!("eq@{ty}")
}

/// Lowers a complete program (prelude included, functional patterns
/// already transformed).
pub fn to_core(p: &SurfaceProgram) -> Result<CoreProgram, CompileError> {
    let mut prog = CoreProgram::default();
    declare_types(p, &mut prog)?;

    for f in &p.funcs {
        if f.rules.iter().any(|r| r.patterns.iter().any(Pattern::is_functional)) {
            return Err(CompileError::Invalid(format!(
                "functional pattern left in `{}`",
                f.name
            )));
        }
        add_func(&mut prog, &f.name, f.arity(), FuncKind::User)?;
    }
    let with_gen = types_with_generators(&prog);
    for t in 0..prog.types.len() {
        if with_gen.contains(&t) {
            let name = generator_name(&prog.types[t].name);
            let arity = prog.types[t].params.len();
            let id = add_func(&mut prog, &name, arity, FuncKind::Generator(t))?;
            prog.generators.insert(t, id);
        }
    }
    let bool_ctors = bool_ctors(&prog);
    if bool_ctors.is_some() {
        for t in 0..prog.types.len() {
            if prog.types[t].ctors.iter().all(|&c| prog.ctors[c].fields.iter().all(first_order)) {
                let name = equality_name(&prog.types[t].name);
                let id = add_func(&mut prog, &name, 2, FuncKind::Equality(t))?;
                prog.equalities.insert(t, id);
            }
        }
    }

    let mut bodies = Vec::with_capacity(prog.funcs.len());
    for (id, func) in prog.funcs.iter().enumerate() {
        let (body, slots) = match func.kind {
            FuncKind::User => lower_function(&prog, &p.funcs[id])?,
            FuncKind::Generator(t) => generator_body(&prog, t),
            FuncKind::Equality(t) => equality_body(&prog, t, bool_ctors.unwrap()),
            FuncKind::Query => unreachable!(),
        };
        bodies.push((body, slots));
    }
    for (func, (body, slots)) in prog.funcs.iter_mut().zip(&bodies) {
        func.needs_supply = needs_supply(body);
        func.slots = *slots;
    }
    for (id, (body, _)) in bodies.into_iter().enumerate() {
        let assigned = assign_supplies(&prog, &body);
        prog.funcs[id].body = Rc::new(assigned);
    }
    Ok(prog)
}

/// Lowers a query into a nullary function. Its leading `Free` nodes
/// introduce the declared variables in order.
pub fn compile_query(prog: &CoreProgram, q: &Query) -> Result<CoreFunc, CompileError> {
    let mut lw = Lowerer::new(prog, 0, QUERY_NAME);
    let mut scope = HashMap::new();
    let mut frees = Vec::new();
    for d in &q.free {
        if scope.contains_key(&d.name) {
            return Err(CompileError::Duplicate(d.name.clone()));
        }
        let slot = lw.fresh();
        scope.insert(d.name.clone(), slot);
        frees.push((slot, d));
    }
    let mut body = lw.expr(&q.expr, &scope)?;
    for (slot, d) in frees.into_iter().rev() {
        body = lw.free_intro(slot, d, body)?;
    }
    let slots = lw.next_slot;
    let body = assign_supplies(prog, &body);
    Ok(CoreFunc {
        name: QUERY_NAME.to_string(),
        arity: 0,
        slots,
        needs_supply: needs_supply(&body),
        body: Rc::new(body),
        kind: FuncKind::Query,
    })
}

fn add_func(prog: &mut CoreProgram, name: &str, arity: usize, kind: FuncKind) -> Result<FuncId, CompileError> {
    if prog.func_index.contains_key(name) {
        return Err(CompileError::Duplicate(name.to_string()));
    }
    let id = prog.funcs.len();
    prog.funcs.push(CoreFunc {
        name: name.to_string(),
        arity,
        slots: arity,
        body: Rc::new(Expr::Fail),
        needs_supply: false,
        kind,
    });
    prog.func_index.insert(name.to_string(), id);
    Ok(id)
}

fn first_order(t: &Type) -> bool {
    match t {
        Type::Var(_) => true,
        Type::Con(_, args) => args.iter().all(first_order),
        Type::Fun(..) => false,
    }
}

fn declare_types(p: &SurfaceProgram, prog: &mut CoreProgram) -> Result<(), CompileError> {
    let mut decls = vec![DataDecl {
        name: "Success".into(),
        params: vec![],
        ctors: vec![CtorDecl {
            name: "Success".into(),
            fields: vec![],
        }],
    }];
    decls.extend(p.data.iter().cloned());
    for (t, d) in decls.iter().enumerate() {
        if prog.type_index.insert(d.name.clone(), t).is_some() {
            return Err(CompileError::Duplicate(d.name.clone()));
        }
        if d.ctors.is_empty() {
            return Err(CompileError::EmptyType(d.name.clone()));
        }
        prog.types.push(DataType {
            name: d.name.clone(),
            params: d.params.clone(),
            ctors: vec![],
        });
    }
    for (t, d) in decls.iter().enumerate() {
        for (index, c) in d.ctors.iter().enumerate() {
            for f in &c.fields {
                check_type(prog, f, &d.params)?;
            }
            let id = prog.ctors.len();
            if prog.ctor_index.insert(c.name.clone(), id).is_some() {
                return Err(CompileError::Duplicate(c.name.clone()));
            }
            prog.ctors.push(CtorInfo {
                name: c.name.clone(),
                type_id: t,
                index,
                fields: c.fields.clone(),
            });
            prog.types[t].ctors.push(id);
        }
    }
    Ok(())
}

fn check_type(prog: &CoreProgram, t: &Type, params: &[String]) -> Result<(), CompileError> {
    match t {
        Type::Var(v) if params.contains(v) => Ok(()),
        Type::Var(v) => Err(CompileError::UnknownType(v.clone())),
        Type::Con(n, args) => {
            let id = *prog.type_index.get(n).ok_or_else(|| CompileError::UnknownType(n.clone()))?;
            if prog.types[id].params.len() != args.len() {
                return Err(CompileError::Invalid(format!(
                    "type `{n}` expects {} arguments, got {}",
                    prog.types[id].params.len(),
                    args.len()
                )));
            }
            args.iter().try_for_each(|a| check_type(prog, a, params))
        }
        Type::Fun(a, b) => {
            check_type(prog, a, params)?;
            check_type(prog, b, params)
        }
    }
}

fn types_with_generators(prog: &CoreProgram) -> HashSet<TypeId> {
    let mut ok: HashSet<TypeId> = (0..prog.types.len()).collect();
    loop {
        let before = ok.len();
        let snapshot = ok.clone();
        ok.retain(|&t| {
            prog.types[t]
                .ctors
                .iter()
                .all(|&c| prog.ctors[c].fields.iter().all(|f| type_generable(prog, f, &snapshot)))
        });
        if ok.len() == before {
            return ok;
        }
    }
}

fn type_generable(prog: &CoreProgram, t: &Type, ok: &HashSet<TypeId>) -> bool {
    match t {
        Type::Var(_) => true,
        Type::Con(n, args) => ok.contains(&prog.type_index[n]) && args.iter().all(|a| type_generable(prog, a, ok)),
        Type::Fun(..) => false,
    }
}

fn bool_ctors(prog: &CoreProgram) -> Option<(CtorId, CtorId)> {
    Some((prog.ctor_named("False")?, prog.ctor_named("True")?))
}

fn peano(prog: &CoreProgram, n: u64) -> Result<Expr, CompileError> {
    let z = prog.ctor_named("Z").ok_or_else(|| CompileError::UnknownCtor("Z".into()))?;
    let s = prog.ctor_named("S").ok_or_else(|| CompileError::UnknownCtor("S".into()))?;
    let mut e = Expr::Ctor(z, vec![]);
    for _ in 0..n {
        e = Expr::Ctor(s, vec![Rc::new(e)]);
    }
    Ok(e)
}

/// Integer literals in patterns become Peano constructor patterns.
fn expand_int_patterns(p: &Pattern) -> Pattern {
    match p {
        Pattern::Int(n) => {
            let mut q = Pattern::Ctor("Z".into(), vec![]);
            for _ in 0..*n {
                q = Pattern::Ctor("S".into(), vec![q]);
            }
            q
        }
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(expand_int_patterns).collect()),
        other => other.clone(),
    }
}

struct Row<'r> {
    pats: Vec<Pattern>,
    binds: Vec<(String, Slot)>,
    rule: &'r Rule,
}

struct Lowerer<'a> {
    prog: &'a CoreProgram,
    next_slot: usize,
    func_name: &'a str,
}

fn lower_function(prog: &CoreProgram, f: &FuncDef) -> Result<(Expr, usize), CompileError> {
    let arity = f.arity();
    let mut lw = Lowerer::new(prog, arity, &f.name);
    let mut rows = Vec::new();
    for r in &f.rules {
        let mut seen = HashSet::new();
        let mut vs = Vec::new();
        r.patterns.iter().for_each(|p| p.vars(&mut vs));
        for v in vs {
            if !seen.insert(v.clone()) {
                return Err(CompileError::NonLinearPattern {
                    func: f.name.clone(),
                    var: v,
                });
            }
        }
        rows.push(Row {
            pats: r.patterns.iter().map(expand_int_patterns).collect(),
            binds: vec![],
            rule: r,
        });
    }
    let cols: Vec<Slot> = (0..arity).collect();
    let body = lw.match_rows(&cols, rows)?;
    Ok((body, lw.next_slot))
}

impl<'a> Lowerer<'a> {
    fn new(prog: &'a CoreProgram, arity: usize, func_name: &'a str) -> Self {
        Lowerer {
            prog,
            next_slot: arity,
            func_name,
        }
    }

    fn fresh(&mut self) -> Slot {
        self.next_slot += 1;
        self.next_slot - 1
    }

    fn match_rows(&mut self, cols: &[Slot], mut rows: Vec<Row<'_>>) -> Result<Expr, CompileError> {
        if rows.is_empty() {
            return Ok(Expr::Fail);
        }
        let split = rows[0].pats.iter().position(|p| matches!(p, Pattern::Ctor(..)));
        let Some(c) = split else {
            let rest = rows.split_off(1);
            let row = rows.pop().unwrap();
            let mut binds = row.binds.clone();
            for (p, &slot) in row.pats.iter().zip(cols) {
                if let Pattern::Var(v) = p {
                    binds.push((v.clone(), slot));
                }
            }
            let body = self.rule_body(row.rule, &binds)?;
            if rest.is_empty() {
                return Ok(body);
            }
            let alt = self.match_rows(cols, rest)?;
            return Ok(choice(body, alt));
        };
        let prefix = rows.iter().take_while(|r| matches!(r.pats[c], Pattern::Ctor(..))).count();
        if prefix < rows.len() {
            let rest = rows.split_off(prefix);
            let first = self.match_rows(cols, rows)?;
            let second = self.match_rows(cols, rest)?;
            return Ok(choice(first, second));
        }
        let mut order: Vec<CtorId> = Vec::new();
        let mut groups: HashMap<CtorId, Vec<Row<'_>>> = HashMap::new();
        let mut scrut_type = None;
        for mut row in rows {
            let Pattern::Ctor(name, args) = std::mem::replace(&mut row.pats[c], Pattern::Wildcard) else {
                unreachable!()
            };
            let id = self.prog.ctor_named(&name).ok_or_else(|| CompileError::UnknownCtor(name.clone()))?;
            let info = self.prog.ctor(id);
            if info.arity() != args.len() {
                return Err(CompileError::CtorArity {
                    name,
                    expected: info.arity(),
                    found: args.len(),
                });
            }
            match scrut_type {
                None => scrut_type = Some(info.type_id),
                Some(t) if t != info.type_id => {
                    return Err(CompileError::Invalid(format!(
                        "patterns of different types in one argument of `{}`",
                        self.func_name
                    )))
                }
                _ => {}
            }
            let mut pats = row.pats[..c].to_vec();
            pats.extend(args);
            pats.extend(row.pats[c + 1..].iter().cloned());
            row.pats = pats;
            if !groups.contains_key(&id) {
                order.push(id);
            }
            groups.entry(id).or_default().push(row);
        }
        let mut branches = Vec::new();
        for id in order {
            let arity = self.prog.ctor(id).arity();
            let binders: Vec<Slot> = (0..arity).map(|_| self.fresh()).collect();
            let mut sub_cols = cols[..c].to_vec();
            sub_cols.extend(&binders);
            sub_cols.extend(&cols[c + 1..]);
            let body = self.match_rows(&sub_cols, groups.remove(&id).unwrap())?;
            branches.push(Branch {
                ctor: id,
                binders,
                body: Rc::new(body),
            });
        }
        Ok(Expr::Case {
            scrutinee: cols[c],
            branches,
        })
    }

    fn rule_body(&mut self, rule: &Rule, binds: &[(String, Slot)]) -> Result<Expr, CompileError> {
        let mut scope: HashMap<String, Slot> = binds.iter().cloned().collect();
        let mut frees = Vec::new();
        for d in &rule.free {
            if scope.contains_key(&d.name) {
                return Err(CompileError::Duplicate(d.name.clone()));
            }
            let slot = self.fresh();
            scope.insert(d.name.clone(), slot);
            frees.push((slot, d));
        }
        let rhs = self.expr(&rule.rhs, &scope)?;
        let mut body = match &rule.guard {
            None => rhs,
            Some(g) => {
                let g = self.expr(g, &scope)?;
                self.named_call("cond", vec![g, rhs], &scope)?
            }
        };
        for (slot, d) in frees.into_iter().rev() {
            body = self.free_intro(slot, d, body)?;
        }
        Ok(body)
    }

    fn free_intro(&mut self, slot: Slot, d: &FreeDecl, body: Expr) -> Result<Expr, CompileError> {
        let generator = generator_call(self.prog, &d.ty, &[]).map_err(|ty| CompileError::NoGenerator {
            var: d.name.clone(),
            ty,
        })?;
        Ok(Expr::Free {
            slot,
            name: d.name.clone(),
            ty: d.ty.clone(),
            generator: Rc::new(generator),
            body: Rc::new(body),
        })
    }

    fn expr(&mut self, e: &SExpr, scope: &HashMap<String, Slot>) -> Result<Expr, CompileError> {
        match e {
            SExpr::Var(v) => self.named_call(v, vec![], scope),
            SExpr::Ctor(c) => self.ctor_app(c, vec![]),
            SExpr::Int(n) => peano(self.prog, *n),
            SExpr::List(items) => {
                let mut acc = self.ctor_app("Nil", vec![])?;
                for it in items.iter().rev() {
                    let head = self.expr(it, scope)?;
                    acc = self.ctor_app("Cons", vec![head, acc])?;
                }
                Ok(acc)
            }
            SExpr::Section(op) => self.named_call(op, vec![], scope),
            SExpr::BinOp(op, l, r) => {
                let l = self.expr(l, scope)?;
                let r = self.expr(r, scope)?;
                self.named_call(op, vec![l, r], scope)
            }
            SExpr::App(head, args) => {
                let args = args.iter().map(|a| self.expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
                match &**head {
                    SExpr::Var(v) | SExpr::Section(v) => self.named_call(v, args, scope),
                    SExpr::Ctor(c) => self.ctor_app(c, args),
                    other => {
                        let f = self.expr(other, scope)?;
                        Ok(apply(f, args))
                    }
                }
            }
        }
    }

    fn ctor_app(&mut self, name: &str, args: Vec<Expr>) -> Result<Expr, CompileError> {
        let id = self.prog.ctor_named(name).ok_or_else(|| CompileError::UnknownCtor(name.to_string()))?;
        let arity = self.prog.ctor(id).arity();
        if args.len() > arity {
            return Err(CompileError::CtorArity {
                name: name.to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        let args: Vec<Rc<Expr>> = args.into_iter().map(Rc::new).collect();
        Ok(if args.len() == arity {
            Expr::Ctor(id, args)
        } else {
            Expr::Partial {
                target: Callable::Ctor(id),
                args,
            }
        })
    }

    /// A name applied to arguments: local variable, defined function,
    /// built-in operator or constructor-like primitive.
    fn named_call(&mut self, name: &str, args: Vec<Expr>, scope: &HashMap<String, Slot>) -> Result<Expr, CompileError> {
        if let Some(&slot) = scope.get(name) {
            return Ok(apply(Expr::Var(slot), args));
        }
        if name == ":" {
            return self.ctor_app("Cons", args);
        }
        let primitive_binary = matches!(name, "=:=" | "=:<=" | "==");
        if let (false, Some(f)) = (primitive_binary, self.prog.func_named(name)) {
            let arity = self.prog.func(f).arity;
            let mut args: Vec<Rc<Expr>> = args.into_iter().map(Rc::new).collect();
            if args.len() < arity {
                return Ok(Expr::Partial {
                    target: Callable::Func(f),
                    args,
                });
            }
            let rest = args.split_off(arity);
            let call = Expr::Call {
                func: f,
                args,
                supply: SupplySlot::None,
            };
            return Ok(apply(call, rest.into_iter().map(|r| (*r).clone()).collect()));
        }
        let mut args = args;
        let binary = |args: &mut Vec<Expr>| -> Option<(Rc<Expr>, Rc<Expr>, Vec<Expr>)> {
            if args.len() < 2 {
                return None;
            }
            let rest = args.split_off(2);
            let r = args.pop().unwrap();
            let l = args.pop().unwrap();
            Some((Rc::new(l), Rc::new(r), rest))
        };
        let prim = match name {
            "failed" => Some((Expr::Fail, args.split_off(0))),
            "success" => Some((Expr::Ctor(SUCCESS_CTOR, vec![]), args.split_off(0))),
            "?" => binary(&mut args).map(|(l, r, rest)| {
                (
                    Expr::Choice {
                        left: l,
                        right: r,
                        free: false,
                        id: SupplySlot::None,
                    },
                    rest,
                )
            }),
            "&" => binary(&mut args).map(|(l, r, rest)| (Expr::And(l, r), rest)),
            "cond" => binary(&mut args).map(|(l, r, rest)| (Expr::Cond(l, r), rest)),
            "==" => binary(&mut args).map(|(l, r, rest)| (Expr::Eq(l, r), rest)),
            "=:=" => binary(&mut args).map(|(l, r, rest)| {
                (
                    Expr::Unify {
                        lazy: false,
                        left: l,
                        right: r,
                    },
                    rest,
                )
            }),
            "=:<=" => binary(&mut args).map(|(l, r, rest)| {
                (
                    Expr::Unify {
                        lazy: true,
                        left: l,
                        right: r,
                    },
                    rest,
                )
            }),
            _ => None,
        };
        match prim {
            Some((e, rest)) => Ok(apply(e, rest)),
            None if matches!(name, "?" | "&" | "cond" | "==" | "=:=" | "=:<=") => Err(CompileError::Unsupported(
                format!("`{name}` must be applied to two arguments"),
            )),
            None => Err(CompileError::UnknownName(name.to_string())),
        }
    }
}

fn choice(left: Expr, right: Expr) -> Expr {
    Expr::Choice {
        left: Rc::new(left),
        right: Rc::new(right),
        free: false,
        id: SupplySlot::None,
    }
}

fn apply(f: Expr, args: Vec<Expr>) -> Expr {
    if args.is_empty() {
        return f;
    }
    Expr::Apply {
        func: Rc::new(f),
        args: args.into_iter().map(Rc::new).collect(),
        supply: SupplySlot::None,
    }
}

/// The generator call for values of type `t`. Type variables refer to the
/// generator parameters in `params` (slot k for parameter k). On failure
/// returns the offending type as text.
fn generator_call(prog: &CoreProgram, t: &Type, params: &[String]) -> Result<Expr, String> {
    match t {
        Type::Var(v) => match params.iter().position(|p| p == v) {
            Some(k) => Ok(apply_value(Expr::Var(k))),
            None => Err(t.to_string()),
        },
        Type::Con(n, args) => {
            let tid = *prog.type_index.get(n).ok_or_else(|| t.to_string())?;
            let g = *prog.generators.get(&tid).ok_or_else(|| t.to_string())?;
            let args = args
                .iter()
                .map(|a| generator_value(prog, a, params).map(Rc::new))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Call {
                func: g,
                args,
                supply: SupplySlot::None,
            })
        }
        Type::Fun(..) => Err(t.to_string()),
    }
}

/// A generator for `t` as a first-class value, to be passed to the
/// generator of a parameterized type.
fn generator_value(prog: &CoreProgram, t: &Type, params: &[String]) -> Result<Expr, String> {
    match t {
        Type::Var(v) => match params.iter().position(|p| p == v) {
            Some(k) => Ok(Expr::Var(k)),
            None => Err(t.to_string()),
        },
        Type::Con(n, args) => {
            let tid = *prog.type_index.get(n).ok_or_else(|| t.to_string())?;
            let g = *prog.generators.get(&tid).ok_or_else(|| t.to_string())?;
            let args = args
                .iter()
                .map(|a| generator_value(prog, a, params).map(Rc::new))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Partial {
                target: Callable::Func(g),
                args,
            })
        }
        Type::Fun(..) => Err(t.to_string()),
    }
}

/// Calling a function value with no further arguments.
fn apply_value(f: Expr) -> Expr {
    Expr::Apply {
        func: Rc::new(f),
        args: vec![],
        supply: SupplySlot::None,
    }
}

fn generator_body(prog: &CoreProgram, t: TypeId) -> (Expr, usize) {
    let ty = &prog.types[t];
    let mut alts: Vec<Expr> = ty
        .ctors
        .iter()
        .map(|&c| {
            let fields = prog.ctors[c]
                .fields
                .iter()
                .map(|f| Rc::new(generator_call(prog, f, &ty.params).expect("generable field")))
                .collect();
            Expr::Ctor(c, fields)
        })
        .collect();
    let mut body = alts.pop().unwrap();
    while let Some(alt) = alts.pop() {
        body = Expr::Choice {
            left: Rc::new(alt),
            right: Rc::new(body),
            free: true,
            id: SupplySlot::None,
        };
    }
    (body, ty.params.len())
}

fn equality_body(prog: &CoreProgram, t: TypeId, (f, tr): (CtorId, CtorId)) -> (Expr, usize) {
    let ctors = &prog.types[t].ctors;
    let mut next = 2;
    let mut outer = Vec::new();
    for &c in ctors {
        let n = prog.ctors[c].arity();
        let xs: Vec<Slot> = (0..n).map(|k| next + k).collect();
        next += n;
        let mut inner = Vec::new();
        for &d in ctors {
            let m = prog.ctors[d].arity();
            let ys: Vec<Slot> = (0..m).map(|k| next + k).collect();
            next += m;
            let body = if c == d {
                let mut acc: Option<Expr> = None;
                for (&x, &y) in xs.iter().zip(&ys).rev() {
                    let test = Expr::Eq(Rc::new(Expr::Var(x)), Rc::new(Expr::Var(y)));
                    acc = Some(match acc {
                        None => test,
                        Some(rest) => {
                            let tmp = next;
                            next += 1;
                            Expr::Let {
                                slot: tmp,
                                value: Rc::new(test),
                                body: Rc::new(Expr::Case {
                                    scrutinee: tmp,
                                    branches: vec![
                                        Branch {
                                            ctor: tr,
                                            binders: vec![],
                                            body: Rc::new(rest),
                                        },
                                        Branch {
                                            ctor: f,
                                            binders: vec![],
                                            body: Rc::new(Expr::Ctor(f, vec![])),
                                        },
                                    ],
                                }),
                            }
                        }
                    });
                }
                acc.unwrap_or(Expr::Ctor(tr, vec![]))
            } else {
                Expr::Ctor(f, vec![])
            };
            inner.push(Branch {
                ctor: d,
                binders: ys,
                body: Rc::new(body),
            });
        }
        outer.push(Branch {
            ctor: c,
            binders: xs,
            body: Rc::new(Expr::Case {
                scrutinee: 1,
                branches: inner,
            }),
        });
    }
    (
        Expr::Case {
            scrutinee: 0,
            branches: outer,
        },
        next,
    )
}

fn needs_supply(e: &Expr) -> bool {
    match e {
        Expr::Call { .. } | Expr::Apply { .. } | Expr::Choice { .. } => true,
        _ => e.children().into_iter().any(|c| needs_supply(c)),
    }
}

fn is_consumer(prog: &CoreProgram, e: &Expr) -> bool {
    match e {
        Expr::Call { func, .. } => prog.funcs[*func].needs_supply,
        Expr::Apply { .. } | Expr::Choice { .. } => true,
        _ => false,
    }
}

fn first_choice(e: &Expr) -> Option<*const Expr> {
    if let Expr::Choice { .. } = e {
        return Some(e as *const Expr);
    }
    e.children().into_iter().find_map(|c| first_choice(c))
}

fn count_consumers(prog: &CoreProgram, e: &Expr) -> usize {
    let own = usize::from(is_consumer(prog, e));
    own + e.children().into_iter().map(|c| count_consumers(prog, c)).sum::<usize>()
}

/// Sub-supply paths for `m` consumers; see the module documentation.
fn consumer_paths(m: usize, designated: bool) -> Vec<Rc<[Dir]>> {
    if m == 1 && !designated {
        return vec![Rc::from(Vec::new())];
    }
    if m == 1 {
        return vec![Rc::from(vec![Dir::Left])];
    }
    (0..m)
        .map(|j| {
            let mut p = vec![Dir::Right; j];
            if j + 1 < m {
                p.push(Dir::Left);
            }
            Rc::from(p)
        })
        .collect()
}

pub fn assign_supplies(prog: &CoreProgram, body: &Expr) -> Expr {
    let designated = first_choice(body);
    let m = count_consumers(prog, body) - usize::from(designated.is_some());
    let paths = consumer_paths(m, designated.is_some());
    let mut next = 0;
    rebuild(prog, body, designated, &paths, &mut next)
}

fn rebuild(prog: &CoreProgram, e: &Expr, designated: Option<*const Expr>, paths: &[Rc<[Dir]>], next: &mut usize) -> Expr {
    let sub = |c: &Rc<Expr>, next: &mut usize| Rc::new(rebuild(prog, c, designated, paths, next));
    let rebuilt = match e {
        Expr::Var(_) | Expr::Fail => e.clone(),
        Expr::Ctor(c, args) => Expr::Ctor(*c, args.iter().map(|a| sub(a, next)).collect()),
        Expr::Call { func, args, .. } => Expr::Call {
            func: *func,
            args: args.iter().map(|a| sub(a, next)).collect(),
            supply: SupplySlot::None,
        },
        Expr::Partial { target, args } => Expr::Partial {
            target: *target,
            args: args.iter().map(|a| sub(a, next)).collect(),
        },
        Expr::Apply { func, args, .. } => {
            let func = sub(func, next);
            Expr::Apply {
                func,
                args: args.iter().map(|a| sub(a, next)).collect(),
                supply: SupplySlot::None,
            }
        }
        Expr::Case { scrutinee, branches } => Expr::Case {
            scrutinee: *scrutinee,
            branches: branches
                .iter()
                .map(|b| Branch {
                    ctor: b.ctor,
                    binders: b.binders.clone(),
                    body: sub(&b.body, next),
                })
                .collect(),
        },
        Expr::Choice { left, right, free, .. } => {
            let left = sub(left, next);
            Expr::Choice {
                left,
                right: sub(right, next),
                free: *free,
                id: SupplySlot::None,
            }
        }
        Expr::Unify { lazy, left, right } => {
            let left = sub(left, next);
            Expr::Unify {
                lazy: *lazy,
                left,
                right: sub(right, next),
            }
        }
        Expr::And(l, r) => {
            let l = sub(l, next);
            Expr::And(l, sub(r, next))
        }
        Expr::Cond(l, r) => {
            let l = sub(l, next);
            Expr::Cond(l, sub(r, next))
        }
        Expr::Eq(l, r) => {
            let l = sub(l, next);
            Expr::Eq(l, sub(r, next))
        }
        Expr::Let { slot, value, body } => {
            let value = sub(value, next);
            Expr::Let {
                slot: *slot,
                value,
                body: sub(body, next),
            }
        }
        Expr::Free {
            slot,
            name,
            ty,
            generator,
            body,
        } => {
            let generator = sub(generator, next);
            Expr::Free {
                slot: *slot,
                name: name.clone(),
                ty: ty.clone(),
                generator,
                body: sub(body, next),
            }
        }
    };
    if !is_consumer(prog, e) {
        return rebuilt;
    }
    let slot = if designated == Some(e as *const Expr) {
        SupplySlot::whole()
    } else {
        *next += 1;
        SupplySlot::Path(paths[*next - 1].clone())
    };
    match rebuilt {
        Expr::Call { func, args, .. } => Expr::Call { func, args, supply: slot },
        Expr::Apply { func, args, .. } => Expr::Apply { func, args, supply: slot },
        Expr::Choice { left, right, free, .. } => Expr::Choice {
            left,
            right,
            free,
            id: slot,
        },
        other => other,
    }
}
