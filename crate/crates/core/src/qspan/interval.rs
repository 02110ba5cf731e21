use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::QspanError;
use crate::num::{self, Rational};

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, QspanError> {
        if lo > hi {
            return Err(QspanError::InvertedInterval {
                lo: num::to_pq(&lo),
                hi: num::to_pq(&hi),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// Builds from endpoints in either order.
    pub fn hull(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / num::int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// The exact value when the interval is degenerate.
    pub fn exact(&self) -> Option<&Rational> {
        self.is_point().then_some(&self.lo)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn certainly_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.certainly_positive() && !self.certainly_negative()
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add_rational(&self, q: &Rational) -> Interval {
        Interval {
            lo: &self.lo + q,
            hi: &self.hi + q,
        }
    }

    pub fn scale(&self, q: &Rational) -> Interval {
        Interval::hull(&self.lo * q, &self.hi * q)
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().cloned().unwrap_or_default();
        let hi = products.iter().max().cloned().unwrap_or_default();
        Interval { lo, hi }
    }

    /// `None` when the divisor straddles zero.
    pub fn div(&self, other: &Interval) -> Option<Interval> {
        if other.contains_zero() {
            return None;
        }
        let inv = Interval::hull(other.hi.recip(), other.lo.recip());
        Some(self.mul(&inv))
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval {
                lo: Rational::zero(),
                hi: self.hi.clone().max(-&self.lo),
            }
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    /// Smallest interval containing both.
    pub fn join(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Enclosure of `sqrt(|x|)` over the interval, dyadic endpoints at precision `p`.
    pub fn sqrt_abs(&self, p: u32) -> Interval {
        let a = self.abs();
        if let (Some(lo), Some(hi)) = (num::exact_sqrt(&a.lo), num::exact_sqrt(&a.hi)) {
            return Interval { lo, hi };
        }
        Interval {
            lo: num::sqrt_lower(&a.lo, p),
            hi: num::sqrt_upper(&a.hi, p),
        }
    }

    /// Certain strict ordering `self < other` (every point below every point).
    pub fn certainly_below(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [num::to_pq(&self.lo), num::to_pq(&self.hi)].serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    #[test]
    fn rejects_inverted() {
        assert!(Interval::new(int(2), int(1)).is_err());
    }

    #[test]
    fn abs_cases() {
        let straddle = Interval::new(int(-3), int(2)).unwrap();
        assert_eq!(straddle.abs(), Interval::new(int(0), int(3)).unwrap());
        let neg = Interval::new(int(-3), int(-1)).unwrap();
        assert_eq!(neg.abs(), Interval::new(int(1), int(3)).unwrap());
        let touching = Interval::new(int(-2), int(0)).unwrap();
        assert_eq!(touching.abs(), Interval::new(int(0), int(2)).unwrap());
    }

    #[test]
    fn mul_and_div() {
        let a = Interval::new(int(-1), int(2)).unwrap();
        let b = Interval::new(int(3), int(4)).unwrap();
        assert_eq!(a.mul(&b), Interval::new(int(-4), int(8)).unwrap());
        assert_eq!(b.div(&b).unwrap(), Interval::new(ratio(3, 4), ratio(4, 3)).unwrap());
        assert!(b.div(&a).is_none());
    }

    #[test]
    fn sqrt_of_square_is_exact() {
        let v = Interval::point(ratio(9, 4));
        assert_eq!(v.sqrt_abs(10), Interval::point(ratio(3, 2)));
    }
}
