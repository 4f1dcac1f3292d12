//! Frontend for the core contract language: parsing, safety-query
//! instrumentation, and call inlining/havocking.

pub mod ast;
pub mod inline;
pub mod instrument;
mod lexer;
mod parser;
pub mod types;

pub use ast::*;
pub use inline::{inline_calls, may_write_sets};
pub use instrument::{check_constants_fit, instrument_access, instrument_arith, tag_user_queries};
pub use parser::parse;

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("scope error at {line}:{col}: {msg}")]
    Scope { line: u32, col: u32, msg: String },
    #[error("type error at {line}:{col}: {msg}")]
    Type { line: u32, col: u32, msg: String },
}

impl FrontendError {
    pub fn syntax(loc: Loc, msg: impl Into<String>) -> Self {
        FrontendError::Syntax { line: loc.line, col: loc.col, msg: msg.into() }
    }
    pub fn scope(loc: Loc, msg: impl Into<String>) -> Self {
        FrontendError::Scope { line: loc.line, col: loc.col, msg: msg.into() }
    }
    pub fn ty(loc: Loc, msg: impl Into<String>) -> Self {
        FrontendError::Type { line: loc.line, col: loc.col, msg: msg.into() }
    }
}
