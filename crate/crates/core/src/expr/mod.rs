//! Expression front-end: parsing, plain evaluation and order-4 jet
//! evaluation of functions of `x`.
//!
//! The grammar, precedence table and predefined names are documented in
//! `docs/grammar.md`.

mod ast;
mod eval;
mod jet;
mod parser;

pub use ast::{BinOp, Constant, Expr, Func};
pub use eval::{DomainKind, EvalError};
pub use jet::Jet4;
pub use parser::{parse, ParseError, ParseErrorKind};
