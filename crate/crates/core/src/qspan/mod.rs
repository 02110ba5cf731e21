//! Exact arithmetic in a finitely generated ℚ-span of real constants.
//!
//! Elements are rational coordinate vectors over a [`Basis`]. Group
//! operations and the rationality test are exact; ordering is decided by
//! refining interval enclosures until they separate, up to a precision cap.
//! There is no floating point in this module.

mod basis;
mod constants;
mod element;
mod ext;
mod interval;

pub use basis::{Basis, DEFAULT_PRECISION_CAP};
pub use constants::{BasisConstant, ConstantKind};
pub use element::{RealElement, COMPARE_START_PRECISION};
pub use ext::ExtReal;
pub use interval::Interval;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum QspanError {
    #[error("elements over different bases: {left} vs {right}")]
    BasisMismatch { left: String, right: String },
    #[error("expected {expected} coordinates, found {found}")]
    Arity { expected: usize, found: usize },
    #[error(
        "could not separate {element} from 0 at {precision} bits; the declared basis is probably dependent over Q"
    )]
    PrecisionExhausted { element: String, precision: u32 },
    #[error("interval endpoints out of order: [{lo}, {hi}]")]
    InvertedInterval { lo: String, hi: String },
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
    #[error("invalid constant name `{0}`")]
    InvalidName(String),
    #[error("constant `{0}` declared twice")]
    DuplicateName(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("basis declaration line {line}: {message}")]
    Declaration { line: usize, message: String },
}
