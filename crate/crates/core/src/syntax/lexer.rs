use crate::error::ParseError;
use crate::syntax::ast::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    UIdent(String),
    Int(u64),
    Op(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Data,
    Where,
    Free,
    Eq,
    Bar,
    DColon,
    Arrow,
    Backtick,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// First token on its line.
    pub line_start: bool,
}

const SYMBOL_CHARS: &str = "!#$%&*+./<=>?@\\^|-~:";

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let mut first = true;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: lineno + 1,
                col: i + 1,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            // `--` starts a comment unless it is part of a longer operator like `-->`.
            if c == '-' && chars.get(i + 1) == Some(&'-') {
                let mut j = i;
                while j < chars.len() && chars[j] == '-' {
                    j += 1;
                }
                if j >= chars.len() || !SYMBOL_CHARS.contains(chars[j]) {
                    break;
                }
            }
            let tok = if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse::<u64>().map_err(|_| ParseError::new(pos, "integer literal too large"))?;
                Tok::Int(n)
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.as_str() {
                    "data" => Tok::Data,
                    "where" => Tok::Where,
                    "free" => Tok::Free,
                    _ if c.is_uppercase() => Tok::UIdent(text),
                    _ => Tok::Ident(text),
                }
            } else if SYMBOL_CHARS.contains(c) {
                let start = i;
                while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.as_str() {
                    "=" => Tok::Eq,
                    "|" => Tok::Bar,
                    "::" => Tok::DColon,
                    "->" => Tok::Arrow,
                    _ => Tok::Op(text),
                }
            } else {
                i += 1;
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '`' => Tok::Backtick,
                    _ => return Err(ParseError::new(pos, format!("unexpected character '{c}'"))),
                }
            };
            out.push(Token {
                tok,
                pos,
                line_start: first,
            });
            first = false;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            toks("x =:= y -- trailing\n"),
            vec![Tok::Ident("x".into()), Tok::Op("=:=".into()), Tok::Ident("y".into())]
        );
        assert_eq!(toks("a =:<= b")[1], Tok::Op("=:<=".into()));
        assert_eq!(toks("last' xs")[0], Tok::Ident("last'".into()));
        assert_eq!(toks("data T = A | B")[0], Tok::Data);
    }
}
