use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::basis::is_identifier;
use super::{Basis, Interval, QspanError};
use crate::num::{self, Rational};

/// Starting precision for adaptive comparison, in bits.
pub const COMPARE_START_PRECISION: u32 = 16;

/// An exact real number `Σ coords[i] * basis[i]` in the ℚ-span of a basis.
#[derive(Clone)]
pub struct RealElement {
    basis: Arc<Basis>,
    coords: Vec<Rational>,
}

impl RealElement {
    pub fn new(basis: Arc<Basis>, coords: Vec<Rational>) -> Result<Self, QspanError> {
        if coords.len() != basis.len() {
            return Err(QspanError::Arity {
                expected: basis.len(),
                found: coords.len(),
            });
        }
        Ok(RealElement { basis, coords })
    }

    pub fn zero(basis: &Arc<Basis>) -> Self {
        RealElement {
            coords: vec![Rational::zero(); basis.len()],
            basis: basis.clone(),
        }
    }

    pub fn rational(basis: &Arc<Basis>, q: Rational) -> Self {
        let mut e = Self::zero(basis);
        e.coords[0] = q;
        e
    }

    pub fn integer(basis: &Arc<Basis>, n: i64) -> Self {
        Self::rational(basis, num::int(n))
    }

    /// `q * basis[index]`.
    pub fn unit(basis: &Arc<Basis>, index: usize, q: Rational) -> Self {
        let mut e = Self::zero(basis);
        e.coords[index] = q;
        e
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn same_basis(&self, other: &RealElement) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    fn check_basis(&self, other: &RealElement) -> Result<(), QspanError> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(QspanError::BasisMismatch {
                left: self.basis.to_string(),
                right: other.basis.to_string(),
            })
        }
    }

    pub fn add(&self, other: &RealElement) -> Result<RealElement, QspanError> {
        self.check_basis(other)?;
        Ok(RealElement {
            basis: self.basis.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &RealElement) -> Result<RealElement, QspanError> {
        self.check_basis(other)?;
        Ok(RealElement {
            basis: self.basis.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> RealElement {
        RealElement {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> RealElement {
        RealElement {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|a| a * q).collect(),
        }
    }

    pub fn add_rational(&self, q: &Rational) -> RealElement {
        let mut e = self.clone();
        e.coords[0] += q;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Exact under the declared independence of the basis.
    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.coords[0])
    }

    /// `Some(q)` when `self = q * other` exactly (other nonzero).
    pub fn ratio_to(&self, other: &RealElement) -> Option<Rational> {
        if !self.same_basis(other) || other.is_zero() {
            return None;
        }
        let (idx, pivot) = other.coords.iter().enumerate().find(|(_, c)| !c.is_zero())?;
        let q = &self.coords[idx] / pivot;
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|(a, b)| *a == &q * b)
            .then_some(q)
    }

    /// Interval of width `<= 2^-p` containing the value; nested in `p`.
    ///
    /// Declared-interval constants cap the attainable width at their own.
    pub fn enclose(&self, p: u32) -> Interval {
        let nonzero: Vec<usize> = (1..self.coords.len())
            .filter(|&i| !self.coords[i].is_zero())
            .collect();
        let mut acc = Interval::point(self.coords[0].clone());
        if nonzero.is_empty() {
            return acc;
        }
        let spread = 64 - (nonzero.len() as u64).leading_zeros() as i64;
        for i in nonzero {
            let q = &self.coords[i];
            let mag = num::log2_upper(q).unwrap_or(0);
            let pi = (p as i64 + spread + mag).max(1) as u32;
            let c = self.basis.constant(i).enclose(pi);
            acc = acc.add(&c.scale(q));
        }
        acc
    }

    /// Exact sign via adaptive precision; errors when the precision cap is
    /// reached without separating a nonzero element from 0.
    pub fn signum(&self) -> Result<Ordering, QspanError> {
        if let Some(q) = self.as_rational() {
            return Ok(q.cmp(&Rational::zero()));
        }
        let cap = self.basis.precision_cap();
        let mut p = COMPARE_START_PRECISION.min(cap);
        loop {
            let iv = self.enclose(p);
            if iv.certainly_positive() {
                return Ok(Ordering::Greater);
            }
            if iv.certainly_negative() {
                return Ok(Ordering::Less);
            }
            if p >= cap {
                return Err(QspanError::PrecisionExhausted {
                    element: self.to_string(),
                    precision: p,
                });
            }
            p = (p * 2).min(cap);
        }
    }

    pub fn compare(&self, other: &RealElement) -> Result<Ordering, QspanError> {
        self.check_basis(other)?;
        if self.coords == other.coords {
            return Ok(Ordering::Equal);
        }
        self.sub(other)?.signum()
    }

    pub fn abs(&self) -> Result<RealElement, QspanError> {
        Ok(match self.signum()? {
            Ordering::Less => self.neg(),
            _ => self.clone(),
        })
    }

    /// Parses the literal syntax `q0 + q1*name1 + ...` against a basis.
    pub fn parse(basis: &Arc<Basis>, text: &str) -> Result<RealElement, QspanError> {
        parse_literal(basis, text)
    }
}

impl PartialEq for RealElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_basis(other) && self.coords == other.coords
    }
}

impl Eq for RealElement {}

impl Hash for RealElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl fmt::Display for RealElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, q) in self.coords.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let neg = q.is_negative();
            let mag = q.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if i == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", self.basis.constant(i).name())?;
            } else {
                write!(f, "{}*{}", mag, self.basis.constant(i).name())?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for RealElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealElement({})", self)
    }
}

impl Serialize for RealElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Name(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, QspanError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let q = num::parse_rational(&s)
                    .ok_or_else(|| QspanError::Syntax(format!("bad number `{}`", s)))?;
                out.push(Tok::Num(q));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Name(chars[start..i].iter().collect()));
            }
            other => {
                return Err(QspanError::Syntax(format!(
                    "unexpected character `{}` at {}",
                    other, i
                )))
            }
        }
    }
    Ok(out)
}

fn parse_literal(basis: &Arc<Basis>, text: &str) -> Result<RealElement, QspanError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(QspanError::Syntax("empty element literal".into()));
    }
    let mut acc = RealElement::zero(basis);
    let mut pos = 0;
    let mut sign = Rational::one();
    let mut expect_term = true;
    while pos < toks.len() {
        if expect_term {
            match &toks[pos] {
                Tok::Minus => {
                    sign = -sign;
                    pos += 1;
                    continue;
                }
                Tok::Plus => {
                    pos += 1;
                    continue;
                }
                _ => {}
            }
            let (coef, index, next) = parse_term(basis, &toks, pos)?;
            acc.coords[index] += &sign * coef;
            sign = Rational::one();
            pos = next;
            expect_term = false;
        } else {
            match toks[pos] {
                Tok::Plus => {}
                Tok::Minus => sign = -Rational::one(),
                ref t => return Err(QspanError::Syntax(format!("unexpected token {:?}", t))),
            }
            pos += 1;
            expect_term = true;
        }
    }
    if expect_term {
        return Err(QspanError::Syntax("literal ends with an operator".into()));
    }
    Ok(acc)
}

fn parse_term(
    basis: &Arc<Basis>,
    toks: &[Tok],
    mut pos: usize,
) -> Result<(Rational, usize, usize), QspanError> {
    let mut coef = Rational::one();
    let mut index: Option<usize> = None;
    loop {
        match toks.get(pos) {
            Some(Tok::Num(q)) => {
                coef *= q;
                pos += 1;
            }
            Some(Tok::LParen) => {
                let q = match (toks.get(pos + 1), toks.get(pos + 2), toks.get(pos + 3)) {
                    (Some(Tok::Num(q)), Some(Tok::RParen), _) => {
                        pos += 3;
                        q.clone()
                    }
                    (Some(Tok::Minus), Some(Tok::Num(q)), Some(Tok::RParen)) => {
                        pos += 4;
                        -q.clone()
                    }
                    _ => {
                        return Err(QspanError::Syntax(
                            "parentheses may only wrap a rational".into(),
                        ))
                    }
                };
                coef *= q;
            }
            Some(Tok::Name(n)) => {
                if index.is_some() {
                    return Err(QspanError::Syntax("product of two constants".into()));
                }
                if !is_identifier(n) {
                    return Err(QspanError::InvalidName(n.clone()));
                }
                index = Some(
                    basis
                        .index_of(n)
                        .filter(|&i| i > 0)
                        .ok_or_else(|| QspanError::UnknownConstant(n.clone()))?,
                );
                pos += 1;
            }
            other => {
                return Err(QspanError::Syntax(format!(
                    "expected a rational or constant name, found {:?}",
                    other
                )))
            }
        }
        if toks.get(pos) == Some(&Tok::Star) {
            pos += 1;
        } else {
            break;
        }
    }
    Ok((coef, index.unwrap_or(0), pos))
}
