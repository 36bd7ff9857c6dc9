//! Printing of surface programs. The output re-parses to an equal tree.

use std::fmt::{self, Display, Formatter};

use crate::syntax::ast::*;

fn is_symbolic(op: &str) -> bool {
    !op.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

fn write_op(f: &mut Formatter<'_>, op: &str) -> fmt::Result {
    if is_symbolic(op) {
        write!(f, "{op}")
    } else {
        write!(f, "`{op}`")
    }
}

impl Display for SExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Var(v) | SExpr::Ctor(v) => write!(f, "{v}"),
            SExpr::Int(n) => write!(f, "{n}"),
            SExpr::Section(op) => write!(f, "({op})"),
            SExpr::List(items) => {
                write!(f, "[")?;
                for (k, e) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
            SExpr::App(head, args) => {
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            SExpr::BinOp(op, l, r) => {
                write!(f, "({l} ")?;
                write_op(f, op)?;
                write!(f, " {r})")
            }
        }
    }
}

impl Display for Pattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "{v}"),
            Pattern::Wildcard => write!(f, "_"),
            Pattern::Int(n) => write!(f, "{n}"),
            Pattern::Ctor(c, ps) if ps.is_empty() => write!(f, "{c}"),
            Pattern::Ctor(c, ps) => {
                write!(f, "({c}")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
            Pattern::Functional(e) => match e {
                SExpr::App(..) | SExpr::BinOp(..) => write!(f, "{e}"),
                _ => write!(f, "({e})"),
            },
        }
    }
}

pub struct RuleDisplay<'a> {
    pub name: &'a str,
    pub rule: &'a Rule,
}

impl Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if is_symbolic(self.name) {
            write!(f, "({})", self.name)?;
        } else {
            write!(f, "{}", self.name)?;
        }
        for p in &self.rule.patterns {
            write!(f, " {p}")?;
        }
        if let Some(g) = &self.rule.guard {
            write!(f, " | {g}")?;
        }
        write!(f, " = {}", self.rule.rhs)?;
        if !self.rule.free.is_empty() {
            write!(f, " where ")?;
            for (k, d) in self.rule.free.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} :: {}", d.name, d.ty)?;
            }
            write!(f, " free")?;
        }
        Ok(())
    }
}

impl Display for DataDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "data {}", self.name)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        write!(f, " =")?;
        for (k, c) in self.ctors.iter().enumerate() {
            if k > 0 {
                write!(f, " |")?;
            }
            write!(f, " {}", c.name)?;
            for t in &c.fields {
                write!(f, " {t}")?;
            }
        }
        Ok(())
    }
}

impl Display for SurfaceProgram {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for d in &self.data {
            writeln!(f, "{d}")?;
        }
        for s in &self.sigs {
            if is_symbolic(&s.name) {
                writeln!(f, "({}) :: {}", s.name, s.ty)?;
            } else {
                writeln!(f, "{} :: {}", s.name, s.ty)?;
            }
        }
        for func in &self.funcs {
            for rule in &func.rules {
                writeln!(f, "{}", RuleDisplay { name: &func.name, rule })?;
            }
        }
        Ok(())
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)?;
        if !self.free.is_empty() {
            write!(f, " where ")?;
            for (k, d) in self.free.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} :: {}", d.name, d.ty)?;
            }
            write!(f, " free")?;
        }
        Ok(())
    }
}
