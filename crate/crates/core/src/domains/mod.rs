//! Dense additive subgroups of ℝ inside a ℚ-span, and thinned sets Σ.

mod sigma;
mod subgroup;

pub use sigma::{SigmaFamily, SigmaSet, DEFAULT_SIGMA_CUTOFF};
pub use subgroup::{sort_dedup, DenseSubgroup, GridSpec, DEFAULT_ENUMERATION_CAP};

use thiserror::Error;

use crate::qspan::QspanError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("every generator is zero")]
    AllZero,
    #[error("enumeration would produce about {count} elements (cap {cap}); lower the height or shrink the window")]
    TooMany { count: usize, cap: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid sigma set: {0}")]
    Sigma(String),
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Qspan(#[from] QspanError),
}
