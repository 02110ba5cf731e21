//! Basis constants and their nested dyadic enclosures.
//!
//! Every built-in irrational constant `c` is enclosed at precision `p` by the
//! dyadic cell `[m/2^p, (m+1)/2^p]` with `m = floor(c * 2^p)`. Cells at
//! successive precisions are nested by construction, so refinement is
//! monotone without any bookkeeping. `m` is obtained either exactly (integer
//! square roots) or from a fixed-point series evaluation with a rigorous error
//! bound, retried with more guard bits until the floor is decided.

use std::fmt;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use super::{Interval, QspanError};
use crate::num::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstantKind {
    One,
    Sqrt(BigUint),
    Pi,
    E,
    Log(BigUint),
    /// User-declared enclosure; cannot be refined below its own width.
    Declared(Interval),
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantKind::One => write!(f, "1"),
            ConstantKind::Sqrt(n) => write!(f, "sqrt({})", n),
            ConstantKind::Pi => write!(f, "pi"),
            ConstantKind::E => write!(f, "e"),
            ConstantKind::Log(n) => write!(f, "log({})", n),
            ConstantKind::Declared(iv) => write!(
                f,
                "interval({}, {})",
                num::to_pq(iv.lo()),
                num::to_pq(iv.hi())
            ),
        }
    }
}

impl ConstantKind {
    pub fn validate(&self) -> Result<(), QspanError> {
        match self {
            ConstantKind::Sqrt(n) => {
                let r = n.sqrt();
                if &r * &r == *n {
                    return Err(QspanError::InvalidConstant(format!(
                        "sqrt({}) is rational; only non-square arguments are allowed",
                        n
                    )));
                }
            }
            ConstantKind::Log(n) if *n < BigUint::from(2u32) => {
                return Err(QspanError::InvalidConstant(format!(
                    "log({}) is not a positive irrational",
                    n
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

pub struct BasisConstant {
    name: String,
    kind: ConstantKind,
    // highest precision computed so far and floor(c * 2^p) there
    cache: RwLock<Option<(u32, BigInt)>>,
}

impl Clone for BasisConstant {
    fn clone(&self) -> Self {
        let cache = self.cache.read().map(|c| c.clone()).unwrap_or(None);
        BasisConstant {
            name: self.name.clone(),
            kind: self.kind.clone(),
            cache: RwLock::new(cache),
        }
    }
}

impl fmt::Debug for BasisConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.kind)
    }
}

impl PartialEq for BasisConstant {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}

impl Eq for BasisConstant {}

impl BasisConstant {
    pub fn new(name: impl Into<String>, kind: ConstantKind) -> Result<Self, QspanError> {
        kind.validate()?;
        Ok(BasisConstant {
            name: name.into(),
            kind,
            cache: RwLock::new(None),
        })
    }

    pub fn one() -> Self {
        BasisConstant {
            name: "1".to_string(),
            kind: ConstantKind::One,
            cache: RwLock::new(None),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ConstantKind {
        &self.kind
    }

    /// Closed interval containing the constant, of width `<= 2^-p` for every
    /// built-in kind, nested in `p`.
    pub fn enclose(&self, p: u32) -> Interval {
        match &self.kind {
            ConstantKind::One => Interval::point(Rational::one()),
            ConstantKind::Declared(iv) => iv.clone(),
            _ => {
                let m = self.dyadic_floor(p);
                let den = num::pow2(p);
                Interval::new(
                    Rational::new(m.clone(), den.clone()),
                    Rational::new(m + 1, den),
                )
                .expect("dyadic cell is ordered")
            }
        }
    }

    fn dyadic_floor(&self, p: u32) -> BigInt {
        if let Ok(guard) = self.cache.read() {
            if let Some((cp, m)) = guard.as_ref() {
                if *cp >= p {
                    return m >> (*cp - p) as usize;
                }
            }
        }
        let m = match &self.kind {
            ConstantKind::Sqrt(n) => {
                let scaled: BigUint = n << (2 * p as usize);
                BigInt::from_biguint(Sign::Plus, scaled.sqrt())
            }
            ConstantKind::Pi => decide_floor(p, pi_fixed),
            ConstantKind::E => decide_floor(p, e_fixed),
            ConstantKind::Log(n) => decide_floor(p, |w| ln_fixed(n, w)),
            ConstantKind::One | ConstantKind::Declared(_) => unreachable!("not a series constant"),
        };
        if let Ok(mut guard) = self.cache.write() {
            let better = guard.as_ref().is_none_or(|(cp, _)| *cp < p);
            if better {
                *guard = Some((p, m.clone()));
            }
        }
        m
    }
}

/// Fixed-point approximation at scale `2^w`: value lies in
/// `[(approx - err)/2^w, (approx + err)/2^w]`.
struct Fixed {
    approx: BigInt,
    err: BigInt,
}

fn decide_floor(p: u32, series: impl Fn(u32) -> Fixed) -> BigInt {
    let mut guard = 32u32;
    loop {
        let w = p + guard;
        let Fixed { approx, err } = series(w);
        let lo = (&approx - &err) >> guard as usize;
        let hi = (&approx + &err) >> guard as usize;
        if lo == hi {
            return lo;
        }
        guard *= 2;
    }
}

/// `atan(1/x)` for integer `x >= 5`.
fn atan_inv(x: u32, w: u32) -> Fixed {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut term = num::pow2(w) / BigInt::from(x);
    let mut sum = term.clone();
    let mut k: u64 = 0;
    let mut terms: u64 = 1;
    loop {
        term = &term / &x2;
        if term.is_zero() {
            break;
        }
        k += 1;
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        terms += 1;
    }
    // each retained term is off by < 2.05 ulp, the alternating tail by < 1.05 ulp
    Fixed {
        approx: sum,
        err: BigInt::from(3 * terms + 3),
    }
}

fn pi_fixed(w: u32) -> Fixed {
    let a = atan_inv(5, w);
    let b = atan_inv(239, w);
    Fixed {
        approx: BigInt::from(16) * a.approx - BigInt::from(4) * b.approx,
        err: BigInt::from(16) * a.err + BigInt::from(4) * b.err,
    }
}

fn e_fixed(w: u32) -> Fixed {
    let mut term = num::pow2(w);
    let mut sum = term.clone();
    let mut k: u64 = 1;
    let mut terms: u64 = 1;
    loop {
        term = &term / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += &term;
        terms += 1;
        k += 1;
    }
    Fixed {
        approx: sum,
        err: BigInt::from(2 * terms + 5),
    }
}

/// `atanh(u/v)` for `0 <= u/v <= 1/3`.
fn atanh_ratio(u: &BigInt, v: &BigInt, w: u32) -> Fixed {
    if u.is_zero() {
        return Fixed {
            approx: BigInt::zero(),
            err: BigInt::zero(),
        };
    }
    let u2 = u * u;
    let v2 = v * v;
    let mut term = (u << w as usize) / v;
    let mut sum = term.clone();
    let mut k: u64 = 0;
    let mut terms: u64 = 1;
    loop {
        term = &term * &u2 / &v2;
        if term.is_zero() {
            break;
        }
        k += 1;
        sum += &term / BigInt::from(2 * k + 1);
        terms += 1;
    }
    Fixed {
        approx: sum,
        err: BigInt::from(3 * terms + 2),
    }
}

fn ln_fixed(n: &BigUint, w: u32) -> Fixed {
    // n = 2^k * y with y in [1, 2); ln y = 2 atanh((n - 2^k)/(n + 2^k))
    let k = n.bits() - 1;
    let n = BigInt::from_biguint(Sign::Plus, n.clone());
    let pk = BigInt::one() << k as usize;
    let ln2 = atanh_ratio(&BigInt::one(), &BigInt::from(3), w);
    let rest = atanh_ratio(&(&n - &pk), &(&n + &pk), w);
    let kk = BigInt::from(k);
    Fixed {
        approx: BigInt::from(2) * (&kk * ln2.approx + rest.approx),
        err: BigInt::from(2) * (&kk * ln2.err + rest.err),
    }
}
