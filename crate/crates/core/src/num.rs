//! Rational helpers shared by every module.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn pow2(p: u32) -> BigInt {
    BigInt::one() << p as usize
}

/// `2^-p` as a rational.
pub fn inv_pow2(p: u32) -> Rational {
    Rational::new(BigInt::one(), pow2(p))
}

/// Upper bound on `log2 |q|` (exact for powers of two), `None` for zero.
pub fn log2_upper(q: &Rational) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let n = q.numer().magnitude().bits() as i64;
    let d = q.denom().magnitude().bits() as i64;
    Some(n - d + 1)
}

pub fn floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

pub fn ceil(q: &Rational) -> BigInt {
    -((-q.numer()).div_floor(q.denom()))
}

/// Lower dyadic bound `l/2^p <= sqrt(q)` for `q >= 0`.
pub fn sqrt_lower(q: &Rational, p: u32) -> Rational {
    if q.is_zero() || q.is_negative() {
        return Rational::zero();
    }
    let scaled = floor(&(q * Rational::from_integer(pow2(2 * p))));
    let root = scaled.magnitude().sqrt();
    Rational::new(BigInt::from_biguint(Sign::Plus, root), pow2(p))
}

/// Upper dyadic bound `u/2^p >= sqrt(q)` for `q >= 0`.
pub fn sqrt_upper(q: &Rational, p: u32) -> Rational {
    if q.is_zero() || q.is_negative() {
        return Rational::zero();
    }
    let scaled = ceil(&(q * Rational::from_integer(pow2(2 * p))));
    let mag = scaled.magnitude().clone();
    let mut root = mag.sqrt();
    if &root * &root < mag {
        root += BigUint::one();
    }
    Rational::new(BigInt::from_biguint(Sign::Plus, root), pow2(p))
}

/// Exact square root of a non-negative rational when it is a perfect square.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &rn * &rn == *n && &rd * &rd == *d {
        Some(Rational::new(
            BigInt::from_biguint(Sign::Plus, rn),
            BigInt::from_biguint(Sign::Plus, rd),
        ))
    } else {
        None
    }
}

/// Lossless `p/q` rendering; integers keep the `/1`.
pub fn to_pq(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `p`, `p/q`, or a finite decimal such as `-1.25` or `1e-6`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        if m.contains('/') {
            return None;
        }
        let m = parse_rational(m)?;
        let e: i32 = e.parse().ok()?;
        let p = Rational::from_integer(BigInt::from(10u32).pow(e.unsigned_abs()));
        return Some(if e < 0 { m / p } else { m * p });
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || body.starts_with('-') || body.starts_with('+') {
        return None;
    }
    let value = if let Some((ip, fp)) = body.split_once('.') {
        if (ip.is_empty() && fp.is_empty())
            || !ip.chars().all(|c| c.is_ascii_digit())
            || !fp.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let digits = format!("{}{}", ip, fp);
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let d = BigInt::from(10u32).pow(fp.len() as u32);
        Rational::new(n, d)
    } else {
        if !body.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        Rational::from_integer(body.parse().ok()?)
    };
    Some(if neg { -value } else { value })
}

/// Decimal rendering truncated toward zero, for human-readable summaries only.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = floor(&(a * Rational::from_integer(scale.clone())));
    let (ip, fp) = scaled.div_rem(&scale);
    let mut out = String::new();
    if neg && !scaled.is_zero() {
        out.push('-');
    }
    out.push_str(&ip.to_string());
    if digits > 0 {
        let f = fp.to_string();
        out.push('.');
        for _ in f.len()..digits {
            out.push('0');
        }
        out.push_str(&f);
    }
    out
}

/// Serde helper: rationals as `"p/q"` strings.
pub fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_pq(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("-1.25"), Some(ratio(-5, 4)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("--1"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1e-6"), Some(ratio(1, 1_000_000)));
        assert_eq!(parse_rational("2.5E2"), Some(int(250)));
        assert_eq!(parse_rational("e"), None);
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let two = int(2);
        for p in [1u32, 5, 20, 64] {
            let lo = sqrt_lower(&two, p);
            let hi = sqrt_upper(&two, p);
            assert!(&lo * &lo <= two && &hi * &hi >= two);
            assert!(&hi - &lo <= inv_pow2(p));
        }
        assert_eq!(exact_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(exact_sqrt(&int(2)), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(-1, 3), 4), "-0.3333");
        assert_eq!(to_decimal(&int(2), 2), "2.00");
        assert_eq!(to_pq(&int(2)), "2/1");
    }
}
