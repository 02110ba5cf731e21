//! The sublinear envelope `S*(x) = limsup n S(x/n)` and the upper/lower
//! limit functions `S_A^±` of a function known on a dense subgroup.

mod limits;
mod star;

pub use limits::{
    extend_from_subgroup, upper_lower_limits, EnvelopeParams, Extension, LimitEnvelopePair,
    LimitStep, LinearityAudit, ONE_SIDED_NOTE,
};
pub use star::{star_envelope, EnvelopeSample, EnvelopeVerdict, STAR_WINDOW};

use crate::funcdsl::FunctionExpr;

/// `T(t) = S(-t)`.
pub fn reflect(f: &FunctionExpr) -> FunctionExpr {
    f.reflect()
}
