use std::cmp::Ordering;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::FunctionExpr as E;
use crate::num::{self, Rational};
use crate::qspan::{ExtReal, Interval, QspanError, RealElement};

pub const DEFAULT_EVAL_PRECISION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Qspan(#[from] QspanError),
    #[error("cannot decide rationality of `{0}` (value left the exact span)")]
    Undecidable(String),
}

/// Result of evaluating at a point: exact in the span, or an enclosure once
/// `sqrt_abs` has taken us outside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Exact(RealElement),
    Approx {
        enclosure: Interval,
        /// Known irrationality of the enclosed value, when it can be tracked.
        irrational: Option<bool>,
    },
}

impl Value {
    pub fn enclose(&self, p: u32) -> Interval {
        match self {
            Value::Exact(x) => x.enclose(p),
            Value::Approx { enclosure, .. } => enclosure.clone(),
        }
    }

    pub fn exact(&self) -> Option<&RealElement> {
        match self {
            Value::Exact(x) => Some(x),
            Value::Approx { .. } => None,
        }
    }

    pub fn to_ext(&self, p: u32) -> ExtReal {
        ExtReal::Finite(self.enclose(p))
    }

    pub fn add(&self, other: &Value) -> Result<Value, EvalError> {
        if let (Value::Exact(a), Value::Exact(b)) = (self, other) {
            return Ok(Value::Exact(a.add(b)?));
        }
        let p = DEFAULT_EVAL_PRECISION + 8;
        Ok(Value::approx(self.enclose(p).add(&other.enclose(p)), None))
    }

    pub fn scale(&self, q: &Rational) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a.scale(q)),
            Value::Approx {
                enclosure,
                irrational,
            } => Value::approx(
                enclosure.scale(q),
                if q.is_zero() { Some(false) } else { *irrational },
            ),
        }
    }

    fn irrational(&self) -> Option<bool> {
        match self {
            Value::Exact(x) => Some(!x.is_rational()),
            Value::Approx { irrational, .. } => *irrational,
        }
    }

    fn approx(enclosure: Interval, irrational: Option<bool>) -> Value {
        Value::Approx {
            enclosure,
            irrational,
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Exact(x) => x.serialize(s),
            Value::Approx { enclosure, .. } => enclosure.serialize(s),
        }
    }
}

pub fn evaluate(f: &E, x: &RealElement) -> Result<ExtReal, EvalError> {
    let v = evaluate_value(f, x, DEFAULT_EVAL_PRECISION)?;
    Ok(v.to_ext(DEFAULT_EVAL_PRECISION))
}

/// Evaluates `f(x)`; `p` is the working precision (bits) used only once the
/// value leaves the exact span.
pub fn evaluate_value(f: &E, x: &RealElement, p: u32) -> Result<Value, EvalError> {
    let guard = p + 8;
    Ok(match f {
        E::Var => Value::Exact(x.clone()),
        E::Const(q) => Value::Exact(RealElement::rational(x.basis(), q.clone())),
        E::Neg(a) => match evaluate_value(a, x, p)? {
            Value::Exact(v) => Value::Exact(v.neg()),
            Value::Approx {
                enclosure,
                irrational,
            } => Value::approx(enclosure.neg(), irrational),
        },
        E::Scale(c, a) => {
            if c.is_zero() {
                return Ok(Value::Exact(RealElement::zero(x.basis())));
            }
            match evaluate_value(a, x, p)? {
                Value::Exact(v) => Value::Exact(v.scale(c)),
                Value::Approx {
                    enclosure,
                    irrational,
                } => Value::approx(enclosure.scale(c), irrational),
            }
        }
        E::Add(a, b) | E::Sub(a, b) => {
            let va = evaluate_value(a, x, p)?;
            let vb = evaluate_value(b, x, p)?;
            let sub = matches!(f, E::Sub(..));
            match (&va, &vb) {
                (Value::Exact(u), Value::Exact(w)) => {
                    Value::Exact(if sub { u.sub(w)? } else { u.add(w)? })
                }
                _ => {
                    let (ea, eb) = (va.enclose(guard), vb.enclose(guard));
                    let enclosure = if sub { ea.sub(&eb) } else { ea.add(&eb) };
                    // irrational + rational stays irrational
                    let irrational = match (va.irrational(), vb.irrational()) {
                        (Some(false), other) | (other, Some(false)) => other,
                        _ => None,
                    };
                    Value::approx(enclosure, irrational)
                }
            }
        }
        E::Abs(a) => match evaluate_value(a, x, p)? {
            Value::Exact(v) => Value::Exact(v.abs()?),
            Value::Approx {
                enclosure,
                irrational,
            } => Value::approx(enclosure.abs(), irrational),
        },
        E::Max(a, b) | E::Min(a, b) => {
            let va = evaluate_value(a, x, p)?;
            let vb = evaluate_value(b, x, p)?;
            let want = if matches!(f, E::Max(..)) {
                Ordering::Greater
            } else {
                Ordering::Less
            };
            pick(va, vb, want, guard)?
        }
        E::SqrtAbs(a) => match evaluate_value(a, x, p)? {
            Value::Exact(v) => {
                if let Some(q) = v.as_rational() {
                    let q = num_traits::Signed::abs(q);
                    match num::exact_sqrt(&q) {
                        Some(r) => Value::Exact(RealElement::rational(x.basis(), r)),
                        None => Value::approx(Interval::point(q).sqrt_abs(p), Some(true)),
                    }
                } else {
                    // sqrt of an irrational is irrational
                    let enclosure = v.abs()?.enclose(2 * p + 8).sqrt_abs(p);
                    Value::approx(enclosure, Some(true))
                }
            }
            Value::Approx {
                enclosure,
                irrational,
            } => {
                let irrational = if irrational == Some(true) {
                    Some(true)
                } else {
                    None
                };
                Value::approx(enclosure.sqrt_abs(p), irrational)
            }
        },
        E::IndicatorIrr(a) => {
            let v = evaluate_value(a, x, p)?;
            match v.irrational() {
                Some(irr) => {
                    let q = if irr { Rational::one() } else { Rational::zero() };
                    Value::Exact(RealElement::rational(x.basis(), q))
                }
                None => return Err(EvalError::Undecidable(a.to_string())),
            }
        }
        E::PiecewiseZero(a) => {
            if x.is_zero() {
                Value::Exact(RealElement::zero(x.basis()))
            } else {
                evaluate_value(a, x, p)?
            }
        }
    })
}

fn pick(va: Value, vb: Value, want: Ordering, guard: u32) -> Result<Value, EvalError> {
    if let (Value::Exact(u), Value::Exact(w)) = (&va, &vb) {
        let ord = u.compare(w)?;
        return Ok(if ord == want || ord == Ordering::Equal {
            va
        } else {
            vb
        });
    }
    let (ea, eb) = (va.enclose(guard), vb.enclose(guard));
    let a_wins = match want {
        Ordering::Greater => ea.lo() >= eb.hi(),
        _ => ea.hi() <= eb.lo(),
    };
    let b_wins = match want {
        Ordering::Greater => eb.lo() >= ea.hi(),
        _ => eb.hi() <= ea.lo(),
    };
    Ok(if a_wins {
        va
    } else if b_wins {
        vb
    } else {
        let enclosure = if want == Ordering::Greater {
            ea.max(&eb)
        } else {
            ea.min(&eb)
        };
        let irrational = match (va.irrational(), vb.irrational()) {
            (Some(s), Some(t)) if s == t => Some(s),
            _ => None,
        };
        Value::approx(enclosure, irrational)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::{gallery, parse};
    use crate::num::{int, ratio};
    use crate::qspan::Basis;

    fn exact(f: &str, x: &RealElement) -> RealElement {
        let e = match gallery(f) {
            Ok(e) => e,
            Err(_) => parse(f).unwrap(),
        };
        match evaluate_value(&e, x, 64).unwrap() {
            Value::Exact(v) => v,
            other => panic!("not exact: {:?}", other),
        }
    }

    #[test]
    fn spec_examples() {
        let b = Basis::sqrt2();
        let s2 = RealElement::parse(&b, "sqrt2").unwrap();
        assert_eq!(exact("IRR_INDICATOR", &s2), RealElement::integer(&b, 1));
        let q = RealElement::rational(&b, ratio(3, 5));
        assert_eq!(exact("IRR_INDICATOR", &q), RealElement::integer(&b, 0));
        let m3 = RealElement::integer(&b, -3);
        assert_eq!(exact("VEE(2,1)", &m3), m3);
        assert_eq!(exact("VEE(2,1)", &s2), s2.scale(&int(2)));
        assert_eq!(exact("ABS", &s2.neg()), s2);
        let z = RealElement::zero(&b);
        assert_eq!(exact("SHIFTED", &z), z);
        assert_eq!(exact("SHIFTED", &s2), s2.add_rational(&int(1)));
    }

    #[test]
    fn sqrt_values() {
        let b = Basis::sqrt2();
        let f = gallery("SQRT_ABS").unwrap();
        let four = RealElement::integer(&b, -4);
        assert_eq!(
            evaluate_value(&f, &four, 64).unwrap(),
            Value::Exact(RealElement::integer(&b, 2))
        );
        let two = RealElement::integer(&b, 2);
        let v = evaluate_value(&f, &two, 64).unwrap();
        let iv = v.enclose(64);
        let s2 = RealElement::parse(&b, "sqrt2").unwrap().enclose(64);
        assert!(iv.lo() <= s2.hi() && s2.lo() <= iv.hi());
        assert!(iv.width() <= num::inv_pow2(62));
        // sqrt(sqrt2) is irrational; the indicator must know that
        let g = parse("indicator_irr(sqrt_abs(t))").unwrap();
        let s2e = RealElement::parse(&b, "sqrt2").unwrap();
        assert_eq!(
            evaluate_value(&g, &s2e, 64).unwrap(),
            Value::Exact(RealElement::integer(&b, 1))
        );
        // sqrt(2) - sqrt(2) style cancellation is undecidable through enclosures
        let h = parse("indicator_irr(sqrt_abs(t) - sqrt_abs(t))").unwrap();
        assert!(matches!(
            evaluate_value(&h, &two, 64),
            Err(EvalError::Undecidable(_))
        ));
    }

    #[test]
    fn mixed_max_keeps_exact_winner() {
        let b = Basis::sqrt2();
        let f = parse("max(t, sqrt_abs(t))").unwrap();
        let x = RealElement::integer(&b, 2);
        assert_eq!(evaluate_value(&f, &x, 64).unwrap(), Value::Exact(x));
        let ext = evaluate(&gallery("ABS").unwrap(), &RealElement::integer(&b, -5)).unwrap();
        assert_eq!(ext.exact_value(), Some(&int(5)));
    }
}
