//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' factor)?
//! base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! Whitespace is insignificant. `NUMBER` is a decimal with optional
//! fraction and exponent. Precedence is `^` over unary minus over `*` `/`
//! over `+` `-`, with `^` right-associative, so `-u^2` reads as `-(u^2)`
//! while `2^-u` still parses.

use super::{Expr, Func, NamedConst, Node};
use std::fmt;
use std::sync::Arc;

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("parse error at byte {pos}: unknown identifier `{name}` (not a declared parameter, constant, or function)")]
    UnknownParameter { pos: usize, name: String },
    #[error("parameter `{name}` shadows a built-in function or constant")]
    ShadowedName { name: String },
    #[error("invalid parameter name `{name}`")]
    InvalidParameterName { name: String },
    #[error("duplicate parameter `{name}`")]
    DuplicateParameter { name: String },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Number(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return Err(ParseError::Syntax {
                            pos: start,
                            message: "digits expected after decimal point".into(),
                        });
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    // only consume the exponent if digits follow; otherwise
                    // the `e` is the start of an identifier
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let value: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    message: format!("invalid number `{s}`"),
                })?;
                toks.push((Tok::Number(value), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    params: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        self.i += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                message: format!("expected {tok}, found {}", self.peek()),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => super::BinOp::Add,
                Tok::Minus => super::BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => super::BinOp::Mul,
                Tok::Slash => super::BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Node::Bin(super::BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(x) => Ok(Node::Num(x)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    // function application
                    if self.params.contains(&name.as_str()) {
                        return Err(ParseError::Syntax {
                            pos,
                            message: format!("parameter `{name}` used as a function"),
                        });
                    }
                    let func = Func::by_name(&name)
                        .ok_or_else(|| ParseError::UnknownParameter { pos, name: name.clone() })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if let Some(idx) = self.params.iter().position(|p| *p == name) {
                    return Ok(Node::Param(idx));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(NamedConst::Pi)),
                    "e" => Ok(Node::Const(NamedConst::E)),
                    _ => {
                        if Func::by_name(&name).is_some() {
                            Err(ParseError::Syntax {
                                pos,
                                message: format!("function `{name}` needs an argument list"),
                            })
                        } else {
                            Err(ParseError::UnknownParameter { pos, name })
                        }
                    }
                }
            }
            other => Err(ParseError::Syntax {
                pos,
                message: format!("expected a value, found {other}"),
            }),
        }
    }
}

fn validate_param(name: &str) -> Result<(), ParseError> {
    let mut chars = name.chars();
    let ok_first = chars
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false);
    if !ok_first || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ParseError::InvalidParameterName { name: name.into() });
    }
    if Func::by_name(name).is_some() || name == "pi" || name == "e" {
        return Err(ParseError::ShadowedName { name: name.into() });
    }
    Ok(())
}

pub(super) fn parse(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
    for (i, p) in params.iter().enumerate() {
        validate_param(p)?;
        if params[..i].contains(p) {
            return Err(ParseError::DuplicateParameter { name: (*p).into() });
        }
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(text)?;
    let mut parser = Parser { toks, i: 0, params };
    let node = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(ParseError::Syntax {
            pos: parser.pos(),
            message: format!("unexpected {} after expression", parser.peek()),
        });
    }
    Ok(Expr {
        node,
        params: Arc::from(
            params
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<String>>(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_input_reports_position() {
        let err = Expr::parse("u + * 2", &["u"]).unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        let err = Expr::parse("sin(q)", &["u"]).unwrap_err();
        match err {
            ParseError::UnknownParameter { name, .. } => assert_eq!(name, "q"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shadowing_function_names_rejected() {
        let err = Expr::parse("sin + 1", &["sin"]).unwrap_err();
        assert!(matches!(err, ParseError::ShadowedName { .. }));
        let err = Expr::parse("1", &["pi"]).unwrap_err();
        assert!(matches!(err, ParseError::ShadowedName { .. }));
    }

    #[test]
    fn parameter_used_as_function() {
        let err = Expr::parse("u(3)", &["u"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(Expr::parse("  ", &["u"]), Err(ParseError::Empty)));
    }

    #[test]
    fn trailing_garbage() {
        let err = Expr::parse("u + 1 )", &["u"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 6, .. }));
    }

    #[test]
    fn numbers_with_exponents() {
        let e = Expr::parse("1.5e-3 + 2E2", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), 1.5e-3 + 200.0);
        // `e` directly after digits without exponent digits is the constant
        let e = Expr::parse("2*e", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), 2.0 * std::f64::consts::E);
    }

    #[test]
    fn precedence_matches_arithmetic() {
        let e = Expr::parse("1 + 2*3^2 - 8/4", &[]).unwrap();
        assert_eq!(e.evaluate(&[]).unwrap(), 1.0 + 2.0 * 9.0 - 2.0);
    }
}
