use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{BasisConstant, ConstantKind, Interval, QspanError};
use crate::num;

/// Default hard cap for adaptive comparison precision, in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Ordered list of real constants spanning the evaluation domain over ℚ.
///
/// `constants[0]` is always ONE. The constants are *declared* to be linearly
/// independent over ℚ; this is not verified and is the caller's obligation.
/// A dependent basis surfaces as a precision-exhaustion error from comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    constants: Vec<BasisConstant>,
    precision_cap: u32,
}

impl Basis {
    pub fn new(
        declared: impl IntoIterator<Item = (String, ConstantKind)>,
    ) -> Result<Arc<Basis>, QspanError> {
        let mut constants = vec![BasisConstant::one()];
        for (name, kind) in declared {
            if !is_identifier(&name) || name == "t" {
                return Err(QspanError::InvalidName(name));
            }
            if constants.iter().any(|c| c.name() == name) {
                return Err(QspanError::DuplicateName(name));
            }
            if matches!(kind, ConstantKind::One) {
                return Err(QspanError::InvalidConstant(
                    "ONE is implicit and may not be redeclared".into(),
                ));
            }
            constants.push(BasisConstant::new(name, kind)?);
        }
        Ok(Arc::new(Basis {
            constants,
            precision_cap: DEFAULT_PRECISION_CAP,
        }))
    }

    /// The basis `{1}`: exact rational arithmetic only.
    pub fn rational() -> Arc<Basis> {
        Basis::new(Vec::new()).expect("empty declaration is valid")
    }

    /// `{1, sqrt2}`.
    pub fn sqrt2() -> Arc<Basis> {
        Basis::new(vec![("sqrt2".to_string(), ConstantKind::Sqrt(BigUint::from(2u32)))])
            .expect("sqrt(2) is a valid constant")
    }

    /// `{1, sqrt2, sqrt3}`.
    pub fn sqrt2_sqrt3() -> Arc<Basis> {
        Basis::new(vec![
            ("sqrt2".to_string(), ConstantKind::Sqrt(BigUint::from(2u32))),
            ("sqrt3".to_string(), ConstantKind::Sqrt(BigUint::from(3u32))),
        ])
        .expect("valid constants")
    }

    pub fn with_precision_cap(&self, cap: u32) -> Arc<Basis> {
        Arc::new(Basis {
            constants: self.constants.clone(),
            precision_cap: cap.max(16),
        })
    }

    /// Parses the line format `name = sqrt(2) | pi | e | log(n) | interval(lo, hi)`.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Arc<Basis>, QspanError> {
        let mut decls = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            decls.push(parse_declaration(line).map_err(|e| QspanError::Declaration {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Basis::new(decls)
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn constants(&self) -> &[BasisConstant] {
        &self.constants
    }

    pub fn constant(&self, i: usize) -> &BasisConstant {
        &self.constants[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c.name() == name)
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    /// Index of the first irrational constant, if any.
    pub fn first_irrational(&self) -> Option<usize> {
        (self.constants.len() > 1).then_some(1)
    }

    pub fn declaration_text(&self) -> String {
        self.constants[1..]
            .iter()
            .map(|c| format!("{} = {}\n", c.name(), c.kind()))
            .collect()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.constants.iter().map(|c| c.name()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_declaration(line: &str) -> Result<(String, ConstantKind), QspanError> {
    let (name, rhs) = line
        .split_once('=')
        .ok_or_else(|| QspanError::Syntax("expected `name = constant`".into()))?;
    let name = name.trim().to_string();
    let rhs = rhs.trim();
    let kind = if rhs == "pi" {
        ConstantKind::Pi
    } else if rhs == "e" {
        ConstantKind::E
    } else if let Some(arg) = call_arg(rhs, "sqrt") {
        ConstantKind::Sqrt(parse_natural(arg)?)
    } else if let Some(arg) = call_arg(rhs, "log") {
        ConstantKind::Log(parse_natural(arg)?)
    } else if let Some(arg) = call_arg(rhs, "interval") {
        let (lo, hi) = arg
            .split_once(',')
            .ok_or_else(|| QspanError::Syntax("interval needs two endpoints".into()))?;
        let lo = num::parse_rational(lo)
            .ok_or_else(|| QspanError::Syntax(format!("bad endpoint `{}`", lo.trim())))?;
        let hi = num::parse_rational(hi)
            .ok_or_else(|| QspanError::Syntax(format!("bad endpoint `{}`", hi.trim())))?;
        ConstantKind::Declared(Interval::new(lo, hi)?)
    } else {
        return Err(QspanError::Syntax(format!("unknown constant `{}`", rhs)));
    };
    Ok((name, kind))
}

fn call_arg<'a>(text: &'a str, func: &str) -> Option<&'a str> {
    text.strip_prefix(func)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn parse_natural(s: &str) -> Result<BigUint, QspanError> {
    s.trim()
        .parse()
        .map_err(|_| QspanError::Syntax(format!("expected a natural number, got `{}`", s.trim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_declarations() {
        let b = Basis::parse(
            "# constants\nsqrt2 = sqrt(2)\npi = pi\nl3 = log(3)\nc = interval(1.5, 1.6)\n",
        )
        .unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.constant(0).name(), "1");
        assert_eq!(b.index_of("l3"), Some(3));
        let again = Basis::parse(&b.declaration_text()).unwrap();
        assert_eq!(*again, *b);
    }

    #[test]
    fn rejects_bad_declarations() {
        assert!(Basis::parse("x = sqrt(4)").is_err());
        assert!(Basis::parse("x = cos(1)").is_err());
        assert!(Basis::parse("t = pi").is_err());
        assert!(Basis::parse("a = pi\na = e").is_err());
        assert!(Basis::parse("a = interval(2, 1)").is_err());
    }
}
