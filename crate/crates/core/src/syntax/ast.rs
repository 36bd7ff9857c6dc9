//! Surface syntax tree.

use crate::syntax::core::Type;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceProgram {
    pub data: Vec<DataDecl>,
    pub sigs: Vec<TypeSig>,
    pub funcs: Vec<FuncDef>,
}

impl SurfaceProgram {
    pub fn is_empty(&self) -> bool {
        self.data.is_empty() && self.sigs.is_empty() && self.funcs.is_empty()
    }

    pub fn func(&self, name: &str) -> Option<&FuncDef> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn sig(&self, name: &str) -> Option<&Type> {
        self.sigs.iter().find(|s| s.name == name).map(|s| &s.ty)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataDecl {
    pub name: String,
    pub params: Vec<String>,
    pub ctors: Vec<CtorDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtorDecl {
    pub name: String,
    pub fields: Vec<Type>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeSig {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDef {
    pub name: String,
    pub rules: Vec<Rule>,
}

impl FuncDef {
    pub fn arity(&self) -> usize {
        self.rules.first().map_or(0, |r| r.patterns.len())
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub patterns: Vec<Pattern>,
    pub guard: Option<SExpr>,
    pub rhs: SExpr,
    pub free: Vec<FreeDecl>,
    pub pos: Pos,
}

// Source positions do not take part in comparisons.
impl PartialEq for Rule {
    fn eq(&self, other: &Rule) -> bool {
        self.patterns == other.patterns && self.guard == other.guard && self.rhs == other.rhs && self.free == other.free
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeDecl {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Var(String),
    Wildcard,
    Ctor(String, Vec<Pattern>),
    /// Nonnegative integer literal, a Peano numeral.
    Int(u64),
    /// A pattern containing calls of defined operations.
    Functional(SExpr),
}

impl Pattern {
    pub fn is_functional(&self) -> bool {
        match self {
            Pattern::Functional(_) => true,
            Pattern::Ctor(_, ps) => ps.iter().any(Pattern::is_functional),
            _ => false,
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Ctor(_, ps) => ps.iter().for_each(|p| p.vars(out)),
            Pattern::Functional(e) => e.vars(out),
            Pattern::Wildcard | Pattern::Int(_) => {}
        }
    }

    /// The pattern read as an expression.
    pub fn to_expr(&self) -> SExpr {
        match self {
            Pattern::Var(v) => SExpr::Var(v.clone()),
            Pattern::Wildcard => SExpr::Var("_".into()),
            Pattern::Int(n) => SExpr::Int(*n),
            Pattern::Ctor(c, ps) if c == "Cons" && ps.len() == 2 => SExpr::BinOp(
                ":".into(),
                Box::new(ps[0].to_expr()),
                Box::new(ps[1].to_expr()),
            ),
            Pattern::Ctor(c, ps) if c == "Nil" && ps.is_empty() => SExpr::List(vec![]),
            Pattern::Ctor(c, ps) if ps.is_empty() => SExpr::Ctor(c.clone()),
            Pattern::Ctor(c, ps) => SExpr::App(
                Box::new(SExpr::Ctor(c.clone())),
                ps.iter().map(Pattern::to_expr).collect(),
            ),
            Pattern::Functional(e) => e.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Var(String),
    Ctor(String),
    Int(u64),
    List(Vec<SExpr>),
    App(Box<SExpr>, Vec<SExpr>),
    BinOp(String, Box<SExpr>, Box<SExpr>),
    /// An operator used as a value, `(op)`.
    Section(String),
}

impl SExpr {
    pub fn binop(op: &str, l: SExpr, r: SExpr) -> SExpr {
        SExpr::BinOp(op.to_string(), Box::new(l), Box::new(r))
    }

    /// Variables occurring in the expression, in order of first occurrence.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            SExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            SExpr::Ctor(_) | SExpr::Int(_) | SExpr::Section(_) => {}
            SExpr::List(es) => es.iter().for_each(|e| e.vars(out)),
            SExpr::App(f, args) => {
                f.vars(out);
                args.iter().for_each(|e| e.vars(out));
            }
            SExpr::BinOp(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }
}

/// A query: an expression with optional declared logic variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub expr: SExpr,
    pub free: Vec<FreeDecl>,
}
