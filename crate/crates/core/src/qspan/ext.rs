use std::fmt;

use serde::{Serialize, Serializer};

use super::Interval;
use crate::num::Rational;

/// A value in ℝ ∪ {−∞, +∞}; finite values carry an enclosure that is
/// degenerate exactly when the value is known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtReal {
    MinusInfinity,
    Finite(Interval),
    PlusInfinity,
}

impl ExtReal {
    pub fn exact(q: Rational) -> Self {
        ExtReal::Finite(Interval::point(q))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn enclosure(&self) -> Option<&Interval> {
        match self {
            ExtReal::Finite(iv) => Some(iv),
            _ => None,
        }
    }

    pub fn exact_value(&self) -> Option<&Rational> {
        self.enclosure().and_then(Interval::exact)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::MinusInfinity => write!(f, "-inf"),
            ExtReal::PlusInfinity => write!(f, "+inf"),
            ExtReal::Finite(iv) => write!(f, "{}", iv),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::MinusInfinity => s.serialize_str("-inf"),
            ExtReal::PlusInfinity => s.serialize_str("+inf"),
            ExtReal::Finite(iv) => iv.serialize(s),
        }
    }
}
