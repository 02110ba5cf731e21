//! Structural certification: which closure rules prove a property of an
//! expression without sampling.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::FunctionExpr as E;

/// Ordered from weakest to strongest; each level implies the ones below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertLevel {
    Uncertified,
    Subadditive,
    Sublinear,
    Additive,
}

impl fmt::Display for CertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CertLevel::Uncertified => "uncertified",
            CertLevel::Subadditive => "subadditive",
            CertLevel::Sublinear => "sublinear",
            CertLevel::Additive => "additive",
        };
        write!(f, "{}", s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertTag {
    pub level: CertLevel,
    /// Rules applied, innermost first.
    pub derivation: Vec<String>,
}

impl CertTag {
    pub fn subadditive(&self) -> bool {
        self.level >= CertLevel::Subadditive
    }

    pub fn sublinear(&self) -> bool {
        self.level >= CertLevel::Sublinear
    }

    pub fn additive(&self) -> bool {
        self.level == CertLevel::Additive
    }
}

pub fn certify_structure(f: &E) -> CertTag {
    let mut derivation = Vec::new();
    let level = walk(f, &mut derivation);
    CertTag { level, derivation }
}

fn walk(f: &E, log: &mut Vec<String>) -> CertLevel {
    use CertLevel::*;
    let (level, rule) = match f {
        E::Var => (Additive, "t is additive".to_string()),
        E::Const(c) if c.is_zero() => (Additive, "0 is additive".to_string()),
        E::Const(c) if c.is_positive() => (
            Subadditive,
            format!("constant {} >= 0 is subadditive", c),
        ),
        E::Const(c) => (Uncertified, format!("negative constant {}", c)),
        E::Scale(c, a) => {
            let inner = walk(a, log);
            if c.is_zero() {
                (Additive, "0*S is additive".to_string())
            } else if !c.is_negative() {
                (inner, format!("{}*({}) keeps {}", c, inner, inner))
            } else if inner == Additive {
                (Additive, format!("{}*(additive) is additive", c))
            } else {
                (Uncertified, format!("negative multiple {} of {}", c, inner))
            }
        }
        E::Neg(a) => {
            let inner = walk(a, log);
            if inner == Additive {
                (Additive, "-(additive) is additive".to_string())
            } else {
                (Uncertified, format!("negation of {}", inner))
            }
        }
        E::Add(a, b) => {
            let l = walk(a, log).min(walk(b, log));
            (l, format!("sum keeps the weaker tag ({})", l))
        }
        E::Sub(a, b) => {
            let la = walk(a, log);
            let lb = walk(b, log);
            if lb == Additive {
                (la, format!("S - additive keeps {}", la))
            } else {
                (Uncertified, format!("subtracting {}", lb))
            }
        }
        E::Max(a, b) => {
            let l = walk(a, log).min(walk(b, log)).min(Sublinear);
            (l, format!("max keeps the weaker tag, at most sublinear ({})", l))
        }
        E::Min(a, b) => {
            walk(a, log);
            walk(b, log);
            (Uncertified, "min does not preserve subadditivity".to_string())
        }
        E::Abs(a) => {
            let inner = walk(a, log);
            if inner == Additive {
                (Sublinear, "abs(additive) is sublinear".to_string())
            } else {
                (Uncertified, format!("abs of {}", inner))
            }
        }
        E::SqrtAbs(a) => {
            let inner = walk(a, log);
            if inner == Additive {
                (Subadditive, "sqrt_abs(additive) is subadditive".to_string())
            } else {
                (Uncertified, format!("sqrt_abs of {}", inner))
            }
        }
        E::IndicatorIrr(a) => {
            let inner = walk(a, log);
            if inner == Additive {
                (Subadditive, "indicator_irr(additive) is subadditive".to_string())
            } else {
                (Uncertified, format!("indicator_irr of {}", inner))
            }
        }
        E::PiecewiseZero(a) => {
            let inner = walk(a, log);
            if inner >= Sublinear {
                (inner, format!("piecewise_zero keeps {}", inner))
            } else {
                (Uncertified, format!("piecewise_zero of {}", inner))
            }
        }
    };
    log.push(rule);
    level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::{gallery, parse};

    fn level(s: &str) -> CertLevel {
        let e = match gallery(s) {
            Ok(e) => e,
            Err(_) => parse(s).unwrap(),
        };
        certify_structure(&e).level
    }

    #[test]
    fn gallery_tags() {
        assert_eq!(level("ABS"), CertLevel::Sublinear);
        assert_eq!(level("VEE(2,1)"), CertLevel::Sublinear);
        assert_eq!(level("SQRT_ABS"), CertLevel::Subadditive);
        assert_eq!(level("IRR_INDICATOR"), CertLevel::Subadditive);
        assert_eq!(level("LINEAR(1/2)"), CertLevel::Additive);
        assert_eq!(level("LINEAR(-3)"), CertLevel::Additive);
        assert_eq!(level("SHIFTED"), CertLevel::Uncertified);
    }

    #[test]
    fn closure_rules() {
        assert_eq!(level("abs(t) + sqrt_abs(t)"), CertLevel::Subadditive);
        assert_eq!(level("abs(t) - 2*t"), CertLevel::Sublinear);
        assert_eq!(level("-abs(t)"), CertLevel::Uncertified);
        assert_eq!(level("min(t, 2*t)"), CertLevel::Uncertified);
        assert_eq!(level("abs(t) + 1"), CertLevel::Subadditive);
        let tag = certify_structure(&parse("abs(t)").unwrap());
        assert_eq!(tag.derivation.len(), 2);
        assert!(tag.sublinear() && tag.subadditive() && !tag.additive());
    }
}
