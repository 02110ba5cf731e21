use thiserror::Error;

use crate::domains::DomainError;
use crate::funcdsl::{EvalError, ParseError};
use crate::qspan::QspanError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Qspan(#[from] QspanError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("missing context: {0}")]
    MissingContext(String),
    #[error("{0}")]
    Diagnostic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
