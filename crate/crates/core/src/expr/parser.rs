//! Precedence-climbing parser for the expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and its right operand may carry a leading minus,
//! so `2^-1` is accepted and `-x^2` means `-(x^2)`.

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Constant, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at column {}: {kind}", .position + 1)]
pub struct ParseError {
    /// Zero-based character offset of the offending token.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    InvalidNumber(String),
    UnknownIdentifier(String),
    Unexpected { found: String, expected: Vec<&'static str> },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number literal '{s}'"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "found {found}, expected {}", expected.join(" or "))
            }
        }
    }
}

impl ParseError {
    /// The source line with a caret under the error position.
    pub fn caret_diagnostic(&self, source: &str) -> String {
        format!("{source}\n{}^\n{self}", " ".repeat(self.position))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || ch == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent only when digits follow, so `2e` stays `2` then `e`.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lexeme: String = chars[start..i].iter().collect();
            let value: f64 = lexeme
                .parse()
                .map_err(|_| ParseError { position: start, kind: ParseErrorKind::InvalidNumber(lexeme.clone()) })?;
            if !value.is_finite() {
                return Err(ParseError { position: start, kind: ParseErrorKind::InvalidNumber(lexeme) });
            }
            out.push((Tok::Num(value), start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            let tok = match ch {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(ParseError { position: start, kind: ParseErrorKind::UnexpectedChar(ch) }),
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const OPERAND: &[&str] = &["number", "'x'", "constant", "function call", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            position: self.offset(),
            kind: ParseErrorKind::Unexpected { found: self.peek().describe(), expected: expected.to_vec() },
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let (_, at) = self.bump();
                if name == "x" {
                    return Ok(Expr::Var);
                }
                if let Some(c) = Constant::from_name(&name) {
                    return Ok(Expr::Const(c));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "'('")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::call(func, arg));
                }
                Err(ParseError { position: at, kind: ParseErrorKind::UnknownIdentifier(name) })
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }
}

/// Parse an expression in `x`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError { position: 0, kind: ParseErrorKind::Empty });
    }
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}
