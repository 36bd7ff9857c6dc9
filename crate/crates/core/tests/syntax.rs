use std::rc::Rc;

use flx::syntax::ast::SExpr;
use flx::syntax::compile_program;
use flx::syntax::core::{Branch, CoreProgram, Expr};
use flx::syntax::parser::{parse_program, parse_query};
use flx::syntax::validate::validate;
use proptest::prelude::*;

const NOT: &str = "data Color = Red | Green\nnot' :: Bool -> Bool\nnot' True = False\nnot' False = True\n";

fn program() -> CoreProgram {
    let p = compile_program(NOT, true).unwrap();
    assert!(validate(&p).is_empty());
    p
}

fn with_body(p: &mut CoreProgram, body: Expr) {
    let f = p.func_named("not'").unwrap();
    p.funcs[f].body = Rc::new(body);
}

#[test]
fn branch_of_another_type_is_rejected() {
    let mut p = program();
    let (t, f, red) = (
        p.ctor_named("True").unwrap(),
        p.ctor_named("False").unwrap(),
        p.ctor_named("Red").unwrap(),
    );
    let branch = |ctor, body| Branch {
        ctor,
        binders: vec![],
        body: Rc::new(Expr::Ctor(body, vec![])),
    };
    with_body(
        &mut p,
        Expr::Case {
            scrutinee: 0,
            branches: vec![branch(t, f), branch(red, t)],
        },
    );
    let ds = validate(&p);
    assert_eq!(ds.len(), 1, "{ds:?}");
    assert_eq!(ds[0].func, "not'");
    assert!(ds[0].message.contains("`Red` of type `Color`"), "{}", ds[0]);
}

#[test]
fn unbound_variable_is_rejected() {
    let mut p = program();
    let f = p.func_named("not'").unwrap();
    p.funcs[f].slots = 3;
    with_body(&mut p, Expr::Var(2));
    let ds = validate(&p);
    assert_eq!(ds.len(), 1, "{ds:?}");
    assert!(ds[0].message.contains("unbound variable slot 2"), "{}", ds[0]);
}

#[test]
fn arity_mismatch_is_rejected() {
    let mut p = program();
    let t = p.ctor_named("True").unwrap();
    with_body(&mut p, Expr::Ctor(t, vec![Rc::new(Expr::Var(0))]));
    let ds = validate(&p);
    assert!(ds.iter().any(|d| d.message.contains("arity 0")), "{ds:?}");
}

fn sexpr() -> impl Strategy<Value = SExpr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "xs", "f", "go'"]).prop_map(|v| SExpr::Var(v.into())),
        prop::sample::select(vec!["True", "False", "Nothing"]).prop_map(|c| SExpr::Ctor(c.into())),
        (0u64..1000).prop_map(SExpr::Int),
        prop::sample::select(vec!["++", "+", "&"]).prop_map(|o| SExpr::Section(o.into())),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(SExpr::List),
            (
                prop::sample::select(vec!["f", "map", "Just"]),
                prop::collection::vec(inner.clone(), 1..3)
            )
                .prop_map(|(h, args)| {
                    let head = if h.starts_with(char::is_uppercase) {
                        SExpr::Ctor(h.into())
                    } else {
                        SExpr::Var(h.into())
                    };
                    SExpr::App(Box::new(head), args)
                }),
            (
                prop::sample::select(vec!["++", "?", "=:=", "=:<=", "&", ":", "==", "+", "div"]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| SExpr::BinOp(op.into(), Box::new(l), Box::new(r))),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_reparse_to_the_same_tree(e in sexpr()) {
        let printed = e.to_string();
        let q = parse_query(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(q.expr, e);
    }
}

#[test]
fn corpus_programs_print_stably() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let once = parse_program(&src).unwrap().to_string();
        let twice = parse_program(&once).unwrap_or_else(|e| panic!("{}: {e}\n{once}", path.display()));
        assert_eq!(twice.to_string(), once, "{}", path.display());
    }
}
