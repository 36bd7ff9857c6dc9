//! The core IR: uniform case trees over single variables.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::supply::Dir;

pub type FuncId = usize;
pub type CtorId = usize;
pub type TypeId = usize;
pub type Slot = usize;

/// The built-in constraint type and its only constructor.
pub const SUCCESS_TYPE: TypeId = 0;
pub const SUCCESS_CTOR: CtorId = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Var(String),
    Con(String, Vec<Type>),
    Fun(Box<Type>, Box<Type>),
}

impl Type {
    pub fn con(name: &str, args: Vec<Type>) -> Type {
        Type::Con(name.to_string(), args)
    }

    pub fn substitute(&self, subst: &HashMap<String, Type>) -> Type {
        match self {
            Type::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Type::Con(n, args) => {
                Type::Con(n.clone(), args.iter().map(|a| a.substitute(subst)).collect())
            }
            Type::Fun(a, b) => Type::Fun(Box::new(a.substitute(subst)), Box::new(b.substitute(subst))),
        }
    }

    pub fn type_vars(&self, out: &mut Vec<String>) {
        match self {
            Type::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Type::Con(_, args) => args.iter().for_each(|a| a.type_vars(out)),
            Type::Fun(a, b) => {
                a.type_vars(out);
                b.type_vars(out);
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Var(v) => write!(f, "{v}"),
            Type::Con(n, args) if n == "List" && args.len() == 1 => write!(f, "[{}]", args[0]),
            Type::Con(n, args) if args.is_empty() => write!(f, "{n}"),
            Type::Con(n, args) => {
                write!(f, "({n}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Type::Fun(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DataType {
    pub name: String,
    pub params: Vec<String>,
    pub ctors: Vec<CtorId>,
}

#[derive(Clone, Debug)]
pub struct CtorInfo {
    pub name: String,
    pub type_id: TypeId,
    /// Position within the declaring type.
    pub index: usize,
    pub fields: Vec<Type>,
}

impl CtorInfo {
    pub fn arity(&self) -> usize {
        self.fields.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FuncKind {
    User,
    Generator(TypeId),
    Equality(TypeId),
    Query,
}

#[derive(Clone, Debug)]
pub struct CoreFunc {
    pub name: String,
    pub arity: usize,
    /// Number of environment slots: parameters first, then locals.
    pub slots: usize,
    pub body: Rc<Expr>,
    /// Whether calls pass an identifier supply to this function.
    pub needs_supply: bool,
    pub kind: FuncKind,
}

/// Where a consumer takes its identifier supply from, relative to the
/// supply of the enclosing function body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupplySlot {
    None,
    Path(Rc<[Dir]>),
}

impl SupplySlot {
    pub fn whole() -> Self {
        SupplySlot::Path(Rc::from(Vec::new()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Callable {
    Func(FuncId),
    Ctor(CtorId),
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub ctor: CtorId,
    pub binders: Vec<Slot>,
    pub body: Rc<Expr>,
}

#[derive(Clone, Debug)]
pub enum Expr {
    Var(Slot),
    Ctor(CtorId, Vec<Rc<Expr>>),
    /// Saturated call of a known function.
    Call {
        func: FuncId,
        args: Vec<Rc<Expr>>,
        supply: SupplySlot,
    },
    /// A function or constructor applied to fewer arguments than its arity
    /// (possibly none), as a first-class value.
    Partial {
        target: Callable,
        args: Vec<Rc<Expr>>,
    },
    /// Higher-order application of a computed function value.
    Apply {
        func: Rc<Expr>,
        args: Vec<Rc<Expr>>,
        supply: SupplySlot,
    },
    Case {
        scrutinee: Slot,
        branches: Vec<Branch>,
    },
    Choice {
        left: Rc<Expr>,
        right: Rc<Expr>,
        /// Free-flavored: the choice stands for a logic variable.
        free: bool,
        id: SupplySlot,
    },
    /// `=:=` (strict) or `=:<=` (lazy, pattern on the left).
    Unify {
        lazy: bool,
        left: Rc<Expr>,
        right: Rc<Expr>,
    },
    And(Rc<Expr>, Rc<Expr>),
    Cond(Rc<Expr>, Rc<Expr>),
    /// Boolean structural equality, dispatched on the left operand's type.
    Eq(Rc<Expr>, Rc<Expr>),
    Let {
        slot: Slot,
        value: Rc<Expr>,
        body: Rc<Expr>,
    },
    /// Introduces a logic variable bound to its type's generator.
    Free {
        slot: Slot,
        name: String,
        ty: Type,
        generator: Rc<Expr>,
        body: Rc<Expr>,
    },
    Fail,
}

impl Expr {
    pub fn children(&self) -> Vec<&Rc<Expr>> {
        match self {
            Expr::Var(_) | Expr::Fail => vec![],
            Expr::Ctor(_, args) | Expr::Call { args, .. } | Expr::Partial { args, .. } => {
                args.iter().collect()
            }
            Expr::Apply { func, args, .. } => std::iter::once(func).chain(args.iter()).collect(),
            Expr::Case { branches, .. } => branches.iter().map(|b| &b.body).collect(),
            Expr::Choice { left, right, .. }
            | Expr::Unify { left, right, .. }
            | Expr::And(left, right)
            | Expr::Cond(left, right)
            | Expr::Eq(left, right) => vec![left, right],
            Expr::Let { value, body, .. } => vec![value, body],
            Expr::Free { generator, body, .. } => vec![generator, body],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoreProgram {
    pub types: Vec<DataType>,
    pub ctors: Vec<CtorInfo>,
    pub funcs: Vec<CoreFunc>,
    pub type_index: HashMap<String, TypeId>,
    pub ctor_index: HashMap<String, CtorId>,
    pub func_index: HashMap<String, FuncId>,
    /// Generator function per type.
    pub generators: HashMap<TypeId, FuncId>,
    /// Equality function per type.
    pub equalities: HashMap<TypeId, FuncId>,
}

impl CoreProgram {
    pub fn ctor(&self, id: CtorId) -> &CtorInfo {
        &self.ctors[id]
    }

    pub fn func(&self, id: FuncId) -> &CoreFunc {
        &self.funcs[id]
    }

    pub fn ctor_named(&self, name: &str) -> Option<CtorId> {
        self.ctor_index.get(name).copied()
    }

    pub fn func_named(&self, name: &str) -> Option<FuncId> {
        self.func_index.get(name).copied()
    }

    pub fn callable_name(&self, c: Callable) -> &str {
        match c {
            Callable::Func(f) => &self.funcs[f].name,
            Callable::Ctor(c) => &self.ctors[c].name,
        }
    }

    pub fn callable_arity(&self, c: Callable) -> usize {
        match c {
            Callable::Func(f) => self.funcs[f].arity,
            Callable::Ctor(c) => self.ctors[c].arity(),
        }
    }
}
