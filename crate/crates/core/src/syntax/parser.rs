//! Recursive-descent parser for the surface language.
//!
//! A top-level item starts at a token in the first column of a line (or
//! after a `;`). Everything else about layout is ignored, so a long rule
//! may continue on indented lines.

use std::collections::HashMap;

use crate::error::{CompileError, ParseError};
use crate::syntax::ast::*;
use crate::syntax::core::Type;
use crate::syntax::lexer::{tokenize, Tok, Token};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Assoc {
    Left,
    Right,
    None,
}

fn fixity(op: &str) -> (u8, Assoc) {
    match op {
        "&" => (0, Assoc::Right),
        "?" => (1, Assoc::Right),
        "||" => (2, Assoc::Right),
        "&&" => (3, Assoc::Right),
        "==" | "/=" | "=:=" | "=:<=" | "<" | ">" | "<=" | ">=" => (4, Assoc::None),
        ":" | "++" => (5, Assoc::Right),
        "+" | "-" => (6, Assoc::Left),
        "*" => (7, Assoc::Left),
        "." => (9, Assoc::Right),
        _ => (9, Assoc::Left),
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    end_pos: Pos,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], end_pos: Pos) -> Self {
        Parser { toks, i: 0, end_pos }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end_pos, |t| t.pos)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos(), msg))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek_operator(&self) -> Option<(String, usize)> {
        match self.peek()? {
            Tok::Op(op) => Some((op.clone(), 1)),
            Tok::Backtick => match (self.peek_at(1), self.peek_at(2)) {
                (Some(Tok::Ident(name)), Some(Tok::Backtick)) => Some((name.clone(), 3)),
                _ => None,
            },
            _ => None,
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<SExpr, ParseError> {
        let mut lhs = self.application()?;
        while let Some((op, width)) = self.peek_operator() {
            let (prec, assoc) = fixity(&op);
            if prec < min_prec {
                break;
            }
            self.i += width;
            let next = if assoc == Assoc::Right { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            lhs = SExpr::BinOp(op.clone(), Box::new(lhs), Box::new(rhs));
            if assoc == Assoc::None {
                if let Some((op2, _)) = self.peek_operator() {
                    if fixity(&op2).0 == prec {
                        return self.err(format!("operator `{op2}` is non-associative"));
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_) | Tok::UIdent(_) | Tok::Int(_) | Tok::LParen | Tok::LBracket)
        )
    }

    fn application(&mut self) -> Result<SExpr, ParseError> {
        if !self.starts_atom() {
            return self.err("expected an expression");
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(if args.is_empty() {
            head
        } else {
            SExpr::App(Box::new(head), args)
        })
    }

    fn atom(&mut self) -> Result<SExpr, ParseError> {
        match self.bump() {
            Some(Tok::Ident(v)) => Ok(SExpr::Var(v)),
            Some(Tok::UIdent(c)) => Ok(SExpr::Ctor(c)),
            Some(Tok::Int(n)) => Ok(SExpr::Int(n)),
            Some(Tok::LParen) => {
                if let (Some(Tok::Op(op)), Some(Tok::RParen)) = (self.peek().cloned(), self.peek_at(1)) {
                    self.i += 2;
                    return Ok(SExpr::Section(op));
                }
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBracket) => {
                let mut items = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        items.push(self.expr(0)?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.i += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(SExpr::List(items))
            }
            _ => {
                self.i -= 1;
                self.err("expected an expression")
            }
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = self.btype()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.i += 1;
            let rhs = self.ty()?;
            return Ok(Type::Fun(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn btype(&mut self) -> Result<Type, ParseError> {
        if let Some(Tok::UIdent(name)) = self.peek().cloned() {
            self.i += 1;
            let mut args = Vec::new();
            while matches!(self.peek(), Some(Tok::UIdent(_) | Tok::Ident(_) | Tok::LBracket | Tok::LParen)) {
                args.push(self.atype()?);
            }
            return Ok(Type::Con(name, args));
        }
        self.atype()
    }

    fn atype(&mut self) -> Result<Type, ParseError> {
        match self.bump() {
            Some(Tok::UIdent(name)) => Ok(Type::Con(name, vec![])),
            Some(Tok::Ident(v)) => Ok(Type::Var(v)),
            Some(Tok::LBracket) => {
                let t = self.ty()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Type::con("List", vec![t]))
            }
            Some(Tok::LParen) => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => {
                self.i -= 1;
                self.err("expected a type")
            }
        }
    }

    /// `x, y :: T, z :: U free`
    fn free_decls(&mut self) -> Result<Vec<FreeDecl>, ParseError> {
        let mut out = Vec::new();
        loop {
            let mut names = Vec::new();
            loop {
                match self.bump() {
                    Some(Tok::Ident(v)) => names.push(v),
                    _ => {
                        self.i -= 1;
                        return self.err("expected a variable name");
                    }
                }
                if self.peek() == Some(&Tok::Comma) && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
                    self.i += 1;
                } else {
                    break;
                }
            }
            if self.peek() != Some(&Tok::DColon) {
                return self.err(format!("free variable `{}` needs a type annotation `{} :: T`", names[0], names[0]));
            }
            self.i += 1;
            let ty = self.ty()?;
            out.extend(names.into_iter().map(|name| FreeDecl { name, ty: ty.clone() }));
            match self.peek() {
                Some(Tok::Comma) => self.i += 1,
                Some(Tok::Free) => {
                    self.i += 1;
                    return Ok(out);
                }
                _ => return self.err("expected `,` or `free`"),
            }
        }
    }

    fn data_decl(&mut self) -> Result<DataDecl, ParseError> {
        self.expect(Tok::Data, "`data`")?;
        let name = match self.bump() {
            Some(Tok::UIdent(n)) => n,
            _ => {
                self.i -= 1;
                return self.err("expected a type name");
            }
        };
        let mut params = Vec::new();
        while let Some(Tok::Ident(p)) = self.peek().cloned() {
            self.i += 1;
            params.push(p);
        }
        self.expect(Tok::Eq, "`=`")?;
        let mut ctors = Vec::new();
        loop {
            let cname = match self.bump() {
                Some(Tok::UIdent(n)) => n,
                _ => {
                    self.i -= 1;
                    return self.err("expected a constructor name");
                }
            };
            let mut fields = Vec::new();
            while matches!(self.peek(), Some(Tok::UIdent(_) | Tok::Ident(_) | Tok::LBracket | Tok::LParen)) {
                fields.push(self.atype()?);
            }
            ctors.push(CtorDecl { name: cname, fields });
            if self.peek() == Some(&Tok::Bar) {
                self.i += 1;
            } else {
                break;
            }
        }
        if !self.at_end() {
            return self.err("unexpected token after data declaration");
        }
        Ok(DataDecl { name, params, ctors })
    }

    fn sig_name(&self) -> Option<(String, usize)> {
        match (self.peek()?, self.peek_at(1), self.peek_at(2), self.peek_at(3)) {
            (Tok::Ident(n), Some(Tok::DColon), _, _) => Some((n.clone(), 2)),
            (Tok::LParen, Some(Tok::Op(op)), Some(Tok::RParen), Some(Tok::DColon)) => Some((op.clone(), 4)),
            _ => None,
        }
    }

    fn rule(&mut self) -> Result<(String, Rule), ParseError> {
        let pos = self.pos();
        let lhs = self.expr(0)?;
        let (name, args) = match lhs {
            SExpr::BinOp(op, l, r) if op != ":" => (op, vec![*l, *r]),
            SExpr::App(head, args) => match *head {
                SExpr::Var(f) => (f, args),
                SExpr::Section(op) => (op, args),
                _ => return Err(ParseError::new(pos, "rule must start with a function name")),
            },
            SExpr::Var(f) => (f, vec![]),
            SExpr::Section(op) => (op, vec![]),
            _ => return Err(ParseError::new(pos, "rule must start with a function name")),
        };
        let patterns = args.iter().map(|a| to_pattern(a, pos)).collect::<Result<Vec<_>, _>>()?;
        let guard = if self.peek() == Some(&Tok::Bar) {
            self.i += 1;
            Some(self.expr(0)?)
        } else {
            None
        };
        self.expect(Tok::Eq, "`=`")?;
        let rhs = self.expr(0)?;
        let free = if self.peek() == Some(&Tok::Where) {
            self.i += 1;
            self.free_decls()?
        } else {
            vec![]
        };
        if !self.at_end() {
            return self.err("unexpected token at end of rule");
        }
        Ok((
            name,
            Rule {
                patterns,
                guard,
                rhs,
                free,
                pos,
            },
        ))
    }
}

fn is_function_symbol(e: &SExpr) -> bool {
    match e {
        SExpr::Var(_) | SExpr::Section(_) => true,
        SExpr::BinOp(op, _, _) => op != ":",
        _ => false,
    }
}

/// Reads an argument expression of a rule's left-hand side as a pattern.
pub fn to_pattern(e: &SExpr, pos: Pos) -> Result<Pattern, ParseError> {
    Ok(match e {
        SExpr::Var(v) if v == "_" => Pattern::Wildcard,
        SExpr::Var(v) => Pattern::Var(v.clone()),
        SExpr::Int(n) => Pattern::Int(*n),
        SExpr::Ctor(c) => Pattern::Ctor(c.clone(), vec![]),
        SExpr::List(items) => {
            let mut p = Pattern::Ctor("Nil".into(), vec![]);
            for item in items.iter().rev() {
                p = Pattern::Ctor("Cons".into(), vec![to_pattern(item, pos)?, p]);
            }
            p
        }
        SExpr::BinOp(op, l, r) if op == ":" => {
            Pattern::Ctor("Cons".into(), vec![to_pattern(l, pos)?, to_pattern(r, pos)?])
        }
        SExpr::App(head, args) if matches!(**head, SExpr::Ctor(_)) => {
            let SExpr::Ctor(c) = &**head else { unreachable!() };
            Pattern::Ctor(c.clone(), args.iter().map(|a| to_pattern(a, pos)).collect::<Result<_, _>>()?)
        }
        SExpr::App(head, _) if is_function_symbol(head) => Pattern::Functional(e.clone()),
        SExpr::BinOp(..) => Pattern::Functional(e.clone()),
        SExpr::Section(_) | SExpr::App(..) => {
            return Err(ParseError::new(pos, "invalid pattern"));
        }
    })
}

fn split_items(toks: &[Token]) -> Vec<&[Token]> {
    let mut items = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (k, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::LParen | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBracket => depth -= 1,
            _ => {}
        }
        if t.tok == Tok::Semi && depth == 0 {
            if k > start {
                items.push(&toks[start..k]);
            }
            start = k + 1;
        } else if t.line_start && t.pos.col == 1 && k > start {
            items.push(&toks[start..k]);
            start = k;
            depth = match t.tok {
                Tok::LParen | Tok::LBracket => 1,
                _ => 0,
            };
        }
    }
    if start < toks.len() {
        items.push(&toks[start..]);
    }
    items
}

fn end_pos(toks: &[Token]) -> Pos {
    toks.last().map_or(Pos { line: 1, col: 1 }, |t| Pos {
        line: t.pos.line,
        col: t.pos.col + 1,
    })
}

/// Parses a whole program.
pub fn parse_program(src: &str) -> Result<SurfaceProgram, CompileError> {
    let toks = tokenize(src)?;
    let mut prog = SurfaceProgram::default();
    let mut last_func: Option<String> = None;
    for item in split_items(&toks) {
        let mut p = Parser::new(item, end_pos(item));
        if p.peek() == Some(&Tok::Data) {
            let d = p.data_decl()?;
            if prog.data.iter().any(|x| x.name == d.name) {
                return Err(CompileError::Duplicate(d.name));
            }
            prog.data.push(d);
            last_func = None;
        } else if let Some((name, skip)) = p.sig_name() {
            p.i += skip;
            let ty = p.ty()?;
            if !p.at_end() {
                return Err(p.err::<()>("unexpected token after type signature").unwrap_err().into());
            }
            if prog.sigs.iter().any(|s| s.name == name) {
                return Err(CompileError::Duplicate(format!("{name} ::")));
            }
            prog.sigs.push(TypeSig { name, ty });
        } else {
            let (name, rule) = p.rule()?;
            match prog.funcs.last_mut() {
                Some(f) if last_func.as_deref() == Some(name.as_str()) => f.rules.push(rule),
                _ => {
                    if prog.funcs.iter().any(|f| f.name == name) {
                        return Err(CompileError::Duplicate(name));
                    }
                    prog.funcs.push(FuncDef {
                        name: name.clone(),
                        rules: vec![rule],
                    });
                }
            }
            last_func = Some(name);
        }
    }
    check_program(&prog)?;
    Ok(prog)
}

/// Checks that can be made on a single file: unique constructors, uniform
/// rule arity, and arities of patterns over constructors declared here.
fn check_program(prog: &SurfaceProgram) -> Result<(), CompileError> {
    let mut arities: HashMap<&str, usize> = HashMap::new();
    for d in &prog.data {
        for c in &d.ctors {
            if arities.insert(&c.name, c.fields.len()).is_some() {
                return Err(CompileError::Duplicate(c.name.clone()));
            }
        }
    }
    fn check_pat(p: &Pattern, arities: &HashMap<&str, usize>) -> Result<(), CompileError> {
        if let Pattern::Ctor(c, args) = p {
            if let Some(&n) = arities.get(c.as_str()) {
                if n != args.len() {
                    return Err(CompileError::CtorArity {
                        name: c.clone(),
                        expected: n,
                        found: args.len(),
                    });
                }
            }
            for a in args {
                check_pat(a, arities)?;
            }
        }
        Ok(())
    }
    for f in &prog.funcs {
        let n = f.arity();
        for r in &f.rules {
            if r.patterns.len() != n {
                return Err(CompileError::RuleArity(f.name.clone()));
            }
            for p in &r.patterns {
                check_pat(p, &arities)?;
            }
        }
    }
    Ok(())
}

/// Parses a query `expr [where x :: T, ... free]`.
pub fn parse_query(src: &str) -> Result<Query, CompileError> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks, end_pos(&toks));
    let expr = p.expr(0)?;
    let free = if p.peek() == Some(&Tok::Where) {
        p.i += 1;
        p.free_decls()?
    } else {
        vec![]
    };
    if !p.at_end() {
        return Err(p.err::<()>("unexpected token in query").unwrap_err().into());
    }
    Ok(Query { expr, free })
}

/// Parses free-variable declarations as given on the command line, `x :: T`.
pub fn parse_free_decls(src: &str) -> Result<Vec<FreeDecl>, CompileError> {
    let toks = tokenize(&format!("{src} free"))?;
    let mut p = Parser::new(&toks, end_pos(&toks));
    let out = p.free_decls()?;
    if !p.at_end() {
        return Err(p.err::<()>("unexpected token").unwrap_err().into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bool_data_decl() {
        let p = parse_program("data Bool = False | True").unwrap();
        assert_eq!(p.data.len(), 1);
        assert_eq!(p.data[0].ctors.len(), 2);
        assert!(p.data[0].ctors.iter().all(|c| c.fields.is_empty()));
    }

    #[test]
    fn empty_file() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("-- only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn rule_with_guard_and_typed_free_vars() {
        let p = parse_program("last xs | ys++[e] =:= xs = e where ys::[Bool], e::Bool free").unwrap();
        let r = &p.funcs[0].rules[0];
        assert_eq!(p.funcs[0].name, "last");
        assert_eq!(r.patterns, vec![Pattern::Var("xs".into())]);
        assert!(matches!(&r.guard, Some(SExpr::BinOp(op, _, _)) if op == "=:="));
        assert_eq!(r.free.len(), 2);
        assert_eq!(r.free[0].ty, Type::con("List", vec![Type::con("Bool", vec![])]));
        assert_eq!(r.free[1].ty, Type::con("Bool", vec![]));
    }

    #[test]
    fn grouped_free_decls() {
        let q = parse_query("f x y where x, y :: Nat free").unwrap();
        assert_eq!(q.free.len(), 2);
        assert!(q.free.iter().all(|d| d.ty == Type::con("Nat", vec![])));
    }

    #[test]
    fn infix_rules_and_functional_patterns() {
        let p = parse_program("x ? _ = x\n_ ? y = y\nlast' (xs++[e]) = e").unwrap();
        assert_eq!(p.funcs[0].name, "?");
        assert_eq!(p.funcs[0].rules.len(), 2);
        assert_eq!(p.funcs[0].rules[1].patterns[0], Pattern::Wildcard);
        assert!(matches!(p.funcs[1].rules[0].patterns[0], Pattern::Functional(_)));
    }

    #[test]
    fn continuation_lines_and_semicolons() {
        let p = parse_program("f x =\n  g x\ng y = y; h = f True").unwrap();
        assert_eq!(p.funcs.len(), 3);
    }

    #[test]
    fn errors() {
        let e = parse_program("f x = (x").unwrap_err();
        assert!(matches!(e, CompileError::Parse(ParseError { line: 1, .. })));
        assert!(matches!(
            parse_program("f = True\ng = False\nf = False"),
            Err(CompileError::Duplicate(_))
        ));
        assert!(matches!(
            parse_program("data T = A Bool\nf (A x y) = x"),
            Err(CompileError::CtorArity { .. })
        ));
        assert!(parse_program("f x = y where y free").is_err());
        assert!(parse_program("data T = A | A").is_err());
    }

    #[test]
    fn list_and_cons_patterns() {
        let p = parse_program("f [a] (x:xs) = a").unwrap();
        let pats = &p.funcs[0].rules[0].patterns;
        assert!(matches!(&pats[0], Pattern::Ctor(c, _) if c == "Cons"));
        assert!(matches!(&pats[1], Pattern::Ctor(c, _) if c == "Cons"));
    }
}
