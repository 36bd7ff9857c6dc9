//! Functional patterns: a rule argument pattern that calls a defined
//! operation is replaced by a fresh variable `y`, and the guard
//! `pattern =:<= y` is put in front of the rule's guard. Variables of the
//! pattern become free variables of the rule; their types come from the
//! rule's `where` clause or are inferred from type signatures.

use std::collections::{HashMap, HashSet};

use crate::error::CompileError;
use crate::syntax::ast::*;
use crate::syntax::core::Type;

pub fn transform_functional_patterns(p: &SurfaceProgram) -> Result<SurfaceProgram, CompileError> {
    let cx = TypeCx::new(p);
    let mut out = p.clone();
    for func in &mut out.funcs {
        for rule in &mut func.rules {
            if rule.patterns.iter().any(Pattern::is_functional) {
                transform_rule(&func.name, rule, &cx)?;
            }
        }
    }
    Ok(out)
}

fn fresh_name(base: &str, used: &mut HashSet<String>) -> String {
    let mut k = 0;
    loop {
        let name = if k == 0 { base.to_string() } else { format!("{base}{k}") };
        if used.insert(name.clone()) {
            return name;
        }
        k += 1;
    }
}

/// Replaces wildcards inside an expression by fresh variables.
fn name_wildcards(e: &mut SExpr, used: &mut HashSet<String>, out: &mut Vec<String>) {
    match e {
        SExpr::Var(v) if v == "_" => {
            let n = fresh_name("w", used);
            out.push(n.clone());
            *v = n;
        }
        SExpr::List(es) => es.iter_mut().for_each(|x| name_wildcards(x, used, out)),
        SExpr::App(f, args) => {
            name_wildcards(f, used, out);
            args.iter_mut().for_each(|x| name_wildcards(x, used, out));
        }
        SExpr::BinOp(_, l, r) => {
            name_wildcards(l, used, out);
            name_wildcards(r, used, out);
        }
        _ => {}
    }
}

fn transform_rule(fname: &str, rule: &mut Rule, cx: &TypeCx) -> Result<(), CompileError> {
    let mut used: HashSet<String> = HashSet::new();
    for p in &rule.patterns {
        let mut vs = Vec::new();
        p.vars(&mut vs);
        used.extend(vs);
    }
    if let Some(g) = &rule.guard {
        let mut vs = Vec::new();
        g.vars(&mut vs);
        used.extend(vs);
    }
    let mut vs = Vec::new();
    rule.rhs.vars(&mut vs);
    used.extend(vs);
    used.extend(rule.free.iter().map(|d| d.name.clone()));

    let mut ordinary: HashSet<String> = HashSet::new();
    for p in rule.patterns.iter().filter(|p| !p.is_functional()) {
        let mut vs = Vec::new();
        p.vars(&mut vs);
        ordinary.extend(vs);
    }

    let mut unifications = Vec::new();
    let mut new_vars: Vec<String> = Vec::new();
    for (k, pat) in rule.patterns.iter_mut().enumerate() {
        if !pat.is_functional() {
            continue;
        }
        let mut e = pat.to_expr();
        let mut wild = Vec::new();
        name_wildcards(&mut e, &mut used, &mut wild);
        let mut vs = Vec::new();
        e.vars(&mut vs);
        for v in vs.into_iter().filter(|v| !cx.is_function(v)) {
            if ordinary.contains(&v) {
                return Err(CompileError::NonLinearPattern {
                    func: fname.to_string(),
                    var: v,
                });
            }
            if !new_vars.contains(&v) {
                new_vars.push(v);
            }
        }
        let y = fresh_name("y", &mut used);
        unifications.push((k, e.clone()));
        rule.guard = Some(match rule.guard.take() {
            None => SExpr::binop("=:<=", e, SExpr::Var(y.clone())),
            Some(g) => SExpr::binop("&", SExpr::binop("=:<=", e, SExpr::Var(y.clone())), g),
        });
        *pat = Pattern::Var(y);
    }
    // Guards were prepended in argument order; restore left-to-right order.
    if unifications.len() > 1 {
        rule.guard = Some(reorder_guard(rule.guard.take().unwrap(), unifications.len()));
    }

    let declared: HashMap<String, Type> = rule.free.iter().map(|d| (d.name.clone(), d.ty.clone())).collect();
    let inferred = cx.infer_pattern_vars(fname, &unifications, &new_vars, &declared)?;
    for v in &new_vars {
        if declared.contains_key(v) {
            continue;
        }
        let ty = inferred[v].clone();
        rule.free.push(FreeDecl { name: v.clone(), ty });
    }
    Ok(())
}

/// `un & (... & (u1 & g))` becomes `u1 & (... & (un & g))`.
fn reorder_guard(g: SExpr, n: usize) -> SExpr {
    let mut units = Vec::new();
    let mut rest = Some(g);
    for _ in 0..n {
        match rest.take().unwrap() {
            SExpr::BinOp(op, l, r) if op == "&" && matches!(&*l, SExpr::BinOp(o, ..) if o == "=:<=") => {
                units.push(*l);
                rest = Some(*r);
            }
            last => {
                units.push(last);
                break;
            }
        }
    }
    let mut acc = rest;
    for u in units {
        acc = Some(match acc {
            None => u,
            Some(a) => SExpr::binop("&", u, a),
        });
    }
    acc.unwrap()
}

/// Just enough type inference to type the variables of a functional pattern.
struct TypeCx {
    sigs: HashMap<String, Type>,
    ctors: HashMap<String, Type>,
    functions: HashSet<String>,
}

struct Infer {
    subst: HashMap<String, Type>,
    next: usize,
}

impl Infer {
    fn fresh(&mut self) -> Type {
        self.next += 1;
        Type::Var(format!("?{}", self.next))
    }

    fn instantiate(&mut self, t: &Type) -> Type {
        let mut vs = Vec::new();
        t.type_vars(&mut vs);
        let s: HashMap<String, Type> = vs.into_iter().map(|v| (v, self.fresh())).collect();
        t.substitute(&s)
    }

    fn resolve(&self, t: &Type) -> Type {
        match t {
            Type::Var(v) => match self.subst.get(v) {
                Some(t2) => self.resolve(t2),
                None => t.clone(),
            },
            Type::Con(n, args) => Type::Con(n.clone(), args.iter().map(|a| self.resolve(a)).collect()),
            Type::Fun(a, b) => Type::Fun(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
        }
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), String> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Var(x), t) | (t, Type::Var(x)) => {
                let mut vs = Vec::new();
                t.type_vars(&mut vs);
                if vs.contains(x) {
                    return Err(format!("infinite type {x} ~ {t}"));
                }
                self.subst.insert(x.clone(), t.clone());
                Ok(())
            }
            (Type::Con(n, xs), Type::Con(m, ys)) if n == m && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            (Type::Fun(a1, b1), Type::Fun(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            _ => Err(format!("type mismatch: {a} vs {b}")),
        }
    }
}

fn fun_type(args: &[Type], result: Type) -> Type {
    args.iter()
        .rev()
        .fold(result, |acc, a| Type::Fun(Box::new(a.clone()), Box::new(acc)))
}

impl TypeCx {
    fn new(p: &SurfaceProgram) -> Self {
        let mut ctors = HashMap::new();
        ctors.insert("Success".to_string(), Type::con("Success", vec![]));
        for d in &p.data {
            let result = Type::Con(d.name.clone(), d.params.iter().map(|v| Type::Var(v.clone())).collect());
            for c in &d.ctors {
                ctors.insert(c.name.clone(), fun_type(&c.fields, result.clone()));
            }
        }
        TypeCx {
            sigs: p.sigs.iter().map(|s| (s.name.clone(), s.ty.clone())).collect(),
            ctors,
            functions: p.funcs.iter().map(|f| f.name.clone()).collect(),
        }
    }

    fn is_function(&self, name: &str) -> bool {
        self.functions.contains(name) || name == "failed" || name == "success"
    }

    fn infer_pattern_vars(
        &self,
        fname: &str,
        units: &[(usize, SExpr)],
        vars: &[String],
        declared: &HashMap<String, Type>,
    ) -> Result<HashMap<String, Type>, CompileError> {
        let mut inf = Infer {
            subst: HashMap::new(),
            next: 0,
        };
        let mut env: HashMap<String, Type> = HashMap::new();
        for v in vars {
            let t = match declared.get(v) {
                Some(t) => t.clone(),
                None => inf.fresh(),
            };
            env.insert(v.clone(), t);
        }
        let param_types: Option<Vec<Type>> = self.sigs.get(fname).map(|sig| {
            let mut ts = Vec::new();
            let mut t = sig;
            while let Type::Fun(a, b) = t {
                ts.push((**a).clone());
                t = b;
            }
            ts
        });
        let err = |var: &str, reason: String| CompileError::UntypedPatternVar {
            func: fname.to_string(),
            var: var.to_string(),
            reason,
        };
        for (k, e) in units {
            let t = self
                .infer(e, &env, &mut inf)
                .map_err(|r| err(vars.first().map_or("_", String::as_str), r))?;
            if let Some(pt) = param_types.as_ref().and_then(|ts| ts.get(*k)) {
                inf.unify(&t, pt).map_err(|r| err(vars.first().map_or("_", String::as_str), r))?;
            }
        }
        let mut out = HashMap::new();
        for v in vars {
            let t = inf.resolve(&env[v]);
            let mut tvs = Vec::new();
            t.type_vars(&mut tvs);
            if !tvs.is_empty() {
                let reason = if param_types.is_none() {
                    format!("add a type signature for `{fname}` or declare `{v} :: T` in the rule's where clause")
                } else {
                    format!("its type `{t}` is not fully determined; declare `{v} :: T` in the rule's where clause")
                };
                return Err(err(v, reason));
            }
            out.insert(v.clone(), t);
        }
        Ok(out)
    }

    fn infer(&self, e: &SExpr, env: &HashMap<String, Type>, inf: &mut Infer) -> Result<Type, String> {
        match e {
            SExpr::Var(v) => {
                if let Some(t) = env.get(v) {
                    return Ok(t.clone());
                }
                match self.sigs.get(v) {
                    Some(t) => Ok(inf.instantiate(t)),
                    None if v == "failed" => Ok(inf.fresh()),
                    None if v == "success" => Ok(Type::con("Success", vec![])),
                    None => Err(format!("`{v}` has no type signature")),
                }
            }
            SExpr::Ctor(c) => match self.ctors.get(c) {
                Some(t) => Ok(inf.instantiate(t)),
                None => Err(format!("unknown constructor `{c}`")),
            },
            SExpr::Int(_) => Ok(Type::con("Nat", vec![])),
            SExpr::List(items) => {
                let elem = inf.fresh();
                for it in items {
                    let t = self.infer(it, env, inf)?;
                    inf.unify(&t, &elem)?;
                }
                Ok(Type::con("List", vec![elem]))
            }
            SExpr::Section(op) => match self.sigs.get(op) {
                Some(t) => Ok(inf.instantiate(t)),
                None => Err(format!("`{op}` has no type signature")),
            },
            SExpr::App(f, args) => {
                let ft = self.infer(f, env, inf)?;
                let mut ats = Vec::new();
                for a in args {
                    ats.push(self.infer(a, env, inf)?);
                }
                let r = inf.fresh();
                inf.unify(&ft, &fun_type(&ats, r.clone()))?;
                Ok(r)
            }
            SExpr::BinOp(op, l, r) => {
                let ft = if op == ":" {
                    let a = inf.fresh();
                    let la = Type::con("List", vec![a.clone()]);
                    fun_type(&[a, la.clone()], la)
                } else {
                    match self.sigs.get(op) {
                        Some(t) => inf.instantiate(t),
                        None => return Err(format!("`{op}` has no type signature")),
                    }
                };
                let lt = self.infer(l, env, inf)?;
                let rt = self.infer(r, env, inf)?;
                let res = inf.fresh();
                inf.unify(&ft, &fun_type(&[lt, rt], res.clone()))?;
                Ok(res)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_program, to_pattern};

    const APPEND: &str = "(++) :: [a] -> [a] -> [a]\n[] ++ ys = ys\n(x:xs) ++ ys = x : (xs ++ ys)\n";

    fn bool_list() -> Type {
        Type::con("List", vec![Type::con("Bool", vec![])])
    }

    fn program(src: &str) -> SurfaceProgram {
        parse_program(&format!("data Bool = False | True\n{APPEND}{src}")).unwrap()
    }

    #[test]
    fn last_prime_is_rewritten() {
        let p = program("last' :: [Bool] -> Bool\nlast' (xs++[e]) = e");
        let t = transform_functional_patterns(&p).unwrap();
        let r = &t.func("last'").unwrap().rules[0];
        assert_eq!(r.patterns, vec![Pattern::Var("y".into())]);
        let pat = SExpr::binop("++", SExpr::Var("xs".into()), SExpr::List(vec![SExpr::Var("e".into())]));
        assert_eq!(r.guard, Some(SExpr::binop("=:<=", pat, SExpr::Var("y".into()))));
        assert_eq!(
            r.free,
            vec![
                FreeDecl { name: "xs".into(), ty: bool_list() },
                FreeDecl { name: "e".into(), ty: Type::con("Bool", vec![]) },
            ]
        );
    }

    #[test]
    fn constructor_patterns_unchanged() {
        let p = program("head (x:xs) = x");
        assert_eq!(transform_functional_patterns(&p).unwrap(), p);
    }

    #[test]
    fn existing_guard_goes_after_the_unification() {
        let p = program("fstDup' :: [Bool] -> Bool\nfstDup' (ys++[e]++zs) | elem e ys =:= True = e");
        let t = transform_functional_patterns(&p).unwrap();
        let r = &t.func("fstDup'").unwrap().rules[0];
        let Some(SExpr::BinOp(op, l, rest)) = &r.guard else { panic!() };
        assert_eq!(op, "&");
        let expected_pat = to_pattern(
            &SExpr::binop(
                "++",
                SExpr::Var("ys".into()),
                SExpr::binop("++", SExpr::List(vec![SExpr::Var("e".into())]), SExpr::Var("zs".into())),
            ),
            Pos::default(),
        )
        .unwrap()
        .to_expr();
        assert_eq!(**l, SExpr::binop("=:<=", expected_pat, SExpr::Var("y".into())));
        assert!(matches!(&**rest, SExpr::BinOp(o, ..) if o == "=:="));
        assert_eq!(r.free.len(), 3);
    }

    #[test]
    fn idempotent() {
        let p = program("last' :: [Bool] -> Bool\nlast' (xs++[e]) = e");
        let once = transform_functional_patterns(&p).unwrap();
        assert_eq!(transform_functional_patterns(&once).unwrap(), once);
    }

    #[test]
    fn where_annotation_types_pattern_vars() {
        let p = program("last' (xs++[e]) = e where xs :: [Bool], e :: Bool free");
        let t = transform_functional_patterns(&p).unwrap();
        assert_eq!(t.func("last'").unwrap().rules[0].free.len(), 2);
    }

    #[test]
    fn untyped_pattern_vars_are_reported() {
        let p = program("last' (xs++[e]) = e");
        assert!(matches!(
            transform_functional_patterns(&p),
            Err(CompileError::UntypedPatternVar { .. })
        ));
    }
}
