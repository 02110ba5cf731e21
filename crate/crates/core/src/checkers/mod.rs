//! Finite probes of subadditivity, ℕ-homogeneity, local boundedness and the
//! zero-limit criterion for continuity at 0.
//!
//! Every comparison is three-valued: exact values are compared exactly,
//! enclosures are compared with a tolerance and may come out `suspect`.

mod bounds;
mod pairs;

pub use bounds::{
    check_local_boundedness, probe_zero_limit, sample_window, sampled_sup_abs, BoundReport, ZeroLimitReport, ZeroLimitStatus,
    DEFAULT_BOUND_LEVELS, DEFAULT_ZERO_APPROACH, DEFAULT_ZERO_TOL,
};
pub use pairs::{check_additive, check_homogeneity, check_subadditive, CheckStatus, ViolationReport, Witness};

use std::cmp::Ordering;

use num_traits::Zero;
use serde::Serialize;

use crate::funcdsl::{evaluate_value, FunctionExpr, Value};
use crate::num::{self, Rational};
use crate::qspan::{Interval, RealElement};
use crate::Result;

/// Working precision for enclosures of values outside the exact span.
pub const WORK_PRECISION: u32 = 64;

pub fn value_at(f: &FunctionExpr, x: &RealElement) -> Result<Value> {
    Ok(evaluate_value(f, x, WORK_PRECISION)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tri {
    Pass,
    Suspect,
    Violation,
}

fn default_tol(l: &Interval, r: &Interval) -> Rational {
    num::int(2) * l.width().max(r.width())
}

/// Decides `lhs <= rhs + tol`.
pub fn compare_le(lhs: &Value, rhs: &Value, tol: Option<&Rational>) -> Result<Tri> {
    if let (Some(a), Some(b)) = (lhs.exact(), rhs.exact()) {
        let d = a.sub(b)?;
        let t = tol.cloned().unwrap_or_else(Rational::zero);
        let bound = RealElement::rational(a.basis(), t);
        return Ok(if d.compare(&bound)? == Ordering::Greater {
            Tri::Violation
        } else {
            Tri::Pass
        });
    }
    let (l, r) = (lhs.enclose(WORK_PRECISION), rhs.enclose(WORK_PRECISION));
    let t = tol.cloned().unwrap_or_else(|| default_tol(&l, &r));
    Ok(if *l.lo() > r.hi() + &t {
        Tri::Violation
    } else if *l.hi() <= r.lo() + &t {
        Tri::Pass
    } else {
        Tri::Suspect
    })
}

/// Decides `|lhs - rhs| <= tol`.
pub fn compare_eq(lhs: &Value, rhs: &Value, tol: Option<&Rational>) -> Result<Tri> {
    if let (Some(a), Some(b)) = (lhs.exact(), rhs.exact()) {
        let d = a.sub(b)?.abs()?;
        let t = tol.cloned().unwrap_or_else(Rational::zero);
        let bound = RealElement::rational(a.basis(), t);
        return Ok(if d.compare(&bound)? == Ordering::Greater {
            Tri::Violation
        } else {
            Tri::Pass
        });
    }
    let (l, r) = (lhs.enclose(WORK_PRECISION), rhs.enclose(WORK_PRECISION));
    let t = tol.cloned().unwrap_or_else(|| default_tol(&l, &r));
    let gap = (l.lo() - r.hi()).max(r.lo() - l.hi());
    let spread = (l.hi() - r.lo()).max(r.hi() - l.lo());
    Ok(if gap > t {
        Tri::Violation
    } else if spread <= t {
        Tri::Pass
    } else {
        Tri::Suspect
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspan::Basis;

    #[test]
    fn exact_and_interval_comparisons() {
        let b = Basis::sqrt2();
        let e = |s: &str| Value::Exact(RealElement::parse(&b, s).unwrap());
        assert_eq!(compare_le(&e("1"), &e("sqrt2"), None).unwrap(), Tri::Pass);
        assert_eq!(compare_le(&e("sqrt2"), &e("1"), None).unwrap(), Tri::Violation);
        assert_eq!(
            compare_le(&e("sqrt2"), &e("1"), Some(&num::int(1))).unwrap(),
            Tri::Pass
        );
        let approx = |lo: i64, hi: i64| Value::Approx {
            enclosure: Interval::new(num::ratio(lo, 100), num::ratio(hi, 100)).unwrap(),
            irrational: None,
        };
        assert_eq!(compare_le(&approx(0, 1), &approx(50, 51), None).unwrap(), Tri::Pass);
        assert_eq!(compare_le(&approx(50, 51), &approx(0, 1), None).unwrap(), Tri::Violation);
        assert_eq!(compare_le(&approx(2, 3), &approx(0, 1), None).unwrap(), Tri::Suspect);
        assert_eq!(compare_eq(&approx(0, 1), &approx(0, 1), None).unwrap(), Tri::Pass);
        assert_eq!(compare_eq(&e("2"), &e("1"), None).unwrap(), Tri::Violation);
    }
}
