//! A small expression language for functions `S: ℝ → ℝ`.
//!
//! Grammar (EBNF), also reproduced in `docs/grammar.md`:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;        (* one side of "*" must be a literal; "/" only by a literal *)
//! unary   = "-" number | "-" unary | primary ;
//! primary = "t" | number | "(" expr ")" | call ;
//! call    = ("abs" | "sqrt_abs" | "indicator_irr" | "piecewise_zero") "(" expr ")"
//!         | ("max" | "min") "(" expr "," expr ")" ;
//! number  = digits [ "." digits ] [ "/" digits ] ;
//! ```

mod cert;
mod eval;
mod gallery;
mod parser;
mod sfn;

pub use cert::{certify_structure, CertLevel, CertTag};
pub use eval::{evaluate, evaluate_value, EvalError, Value, DEFAULT_EVAL_PRECISION};
pub use gallery::{gallery, GalleryEntry};
pub use parser::{parse, ParseError};
pub use sfn::SfnFile;

use std::fmt;

use num_traits::{One, Signed};

use crate::num::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctionExpr {
    Var,
    Const(Rational),
    Neg(Box<FunctionExpr>),
    Add(Box<FunctionExpr>, Box<FunctionExpr>),
    Sub(Box<FunctionExpr>, Box<FunctionExpr>),
    Scale(Rational, Box<FunctionExpr>),
    Abs(Box<FunctionExpr>),
    Max(Box<FunctionExpr>, Box<FunctionExpr>),
    Min(Box<FunctionExpr>, Box<FunctionExpr>),
    SqrtAbs(Box<FunctionExpr>),
    IndicatorIrr(Box<FunctionExpr>),
    PiecewiseZero(Box<FunctionExpr>),
}

use FunctionExpr as E;

impl FunctionExpr {
    pub fn var() -> Self {
        E::Var
    }

    pub fn scale(c: Rational, e: FunctionExpr) -> Self {
        E::Scale(c, Box::new(e))
    }

    pub fn add(a: FunctionExpr, b: FunctionExpr) -> Self {
        E::Add(Box::new(a), Box::new(b))
    }

    pub fn max(a: FunctionExpr, b: FunctionExpr) -> Self {
        E::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: FunctionExpr, b: FunctionExpr) -> Self {
        E::Min(Box::new(a), Box::new(b))
    }

    /// True when evaluation never leaves the ℚ-span (no `sqrt_abs`).
    pub fn is_exact_pipeline(&self) -> bool {
        match self {
            E::Var | E::Const(_) => true,
            E::SqrtAbs(_) => false,
            E::Neg(a) | E::Scale(_, a) | E::Abs(a) | E::IndicatorIrr(a) | E::PiecewiseZero(a) => {
                a.is_exact_pipeline()
            }
            E::Add(a, b) | E::Sub(a, b) | E::Max(a, b) | E::Min(a, b) => {
                a.is_exact_pipeline() && b.is_exact_pipeline()
            }
        }
    }

    /// `t ↦ S(-t)`, with scalings folded so that e.g. the reflection of
    /// `c*t` is `-c*t` and of `abs(t)` is `abs(t)`.
    pub fn reflect(&self) -> FunctionExpr {
        match self {
            E::Var => E::scale(-Rational::one(), E::Var),
            E::Const(q) => E::Const(q.clone()),
            E::Neg(a) => E::Neg(Box::new(a.reflect())),
            E::Add(a, b) => E::Add(Box::new(a.reflect()), Box::new(b.reflect())),
            E::Sub(a, b) => E::Sub(Box::new(a.reflect()), Box::new(b.reflect())),
            E::Scale(c, a) => match a.reflect() {
                E::Scale(d, inner) => E::Scale(c * d, inner),
                other => E::scale(c.clone(), other),
            },
            E::Abs(a) => match a.reflect() {
                E::Scale(d, inner) if d.abs().is_one() => E::Abs(inner),
                E::Scale(d, inner) => E::scale(d.abs(), E::Abs(inner)),
                other => E::Abs(Box::new(other)),
            },
            E::SqrtAbs(a) => match a.reflect() {
                E::Scale(d, inner) if d == -Rational::one() => E::SqrtAbs(inner),
                other => E::SqrtAbs(Box::new(other)),
            },
            E::IndicatorIrr(a) => match a.reflect() {
                E::Scale(d, inner) if d == -Rational::one() => E::IndicatorIrr(inner),
                other => E::IndicatorIrr(Box::new(other)),
            },
            E::Max(a, b) => E::Max(Box::new(a.reflect()), Box::new(b.reflect())),
            E::Min(a, b) => E::Min(Box::new(a.reflect()), Box::new(b.reflect())),
            E::PiecewiseZero(a) => E::PiecewiseZero(Box::new(a.reflect())),
        }
    }

    fn is_call_form(&self) -> bool {
        matches!(
            self,
            E::Var
                | E::Abs(_)
                | E::Max(..)
                | E::Min(..)
                | E::SqrtAbs(_)
                | E::IndicatorIrr(_)
                | E::PiecewiseZero(_)
        )
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Var => write!(f, "t"),
            E::Const(q) => write!(f, "{}", q),
            E::Neg(a) if a.is_call_form() => write!(f, "-{}", a),
            E::Neg(a) => write!(f, "-({})", a),
            E::Add(a, b) => write!(f, "{} + {}", a, Operand(b)),
            E::Sub(a, b) => write!(f, "{} - {}", a, Operand(b)),
            E::Scale(c, a) => match **a {
                E::Add(..) | E::Sub(..) | E::Scale(..) | E::Neg(_) => write!(f, "{}*({})", c, a),
                _ => write!(f, "{}*{}", c, a),
            },
            E::Abs(a) => write!(f, "abs({})", a),
            E::Max(a, b) => write!(f, "max({}, {})", a, b),
            E::Min(a, b) => write!(f, "min({}, {})", a, b),
            E::SqrtAbs(a) => write!(f, "sqrt_abs({})", a),
            E::IndicatorIrr(a) => write!(f, "indicator_irr({})", a),
            E::PiecewiseZero(a) => write!(f, "piecewise_zero({})", a),
        }
    }
}

/// Right operand of `+`/`-`: parenthesised when it is itself a sum.
struct Operand<'a>(&'a FunctionExpr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            E::Add(..) | E::Sub(..) => write!(f, "({})", self.0),
            other => write!(f, "{}", other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    #[test]
    fn reflect_examples() {
        let abs = gallery("ABS").unwrap();
        assert_eq!(abs.reflect(), abs);
        assert_eq!(
            gallery("LINEAR(1/2)").unwrap().reflect(),
            gallery("LINEAR(-1/2)").unwrap()
        );
        assert_eq!(
            FunctionExpr::scale(int(3), E::Var).reflect(),
            FunctionExpr::scale(int(-3), E::Var)
        );
        assert_eq!(
            gallery("SQRT_ABS").unwrap().reflect(),
            gallery("SQRT_ABS").unwrap()
        );
        let _ = ratio(1, 2);
    }

    #[test]
    fn exact_pipeline_detection() {
        assert!(gallery("VEE(2,1)").unwrap().is_exact_pipeline());
        assert!(!gallery("SQRT_ABS").unwrap().is_exact_pipeline());
    }
}
