use std::fmt;

use num_traits::One;

use super::FunctionExpr as E;
use crate::num::{self, Rational};

/// Named reference functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GalleryEntry {
    Abs,
    Linear(Rational),
    /// `max(a*t, b*t)` with `a >= b`.
    Vee(Rational, Rational),
    SqrtAbs,
    IrrIndicator,
    Shifted,
}

impl GalleryEntry {
    pub const NAMES: [&'static str; 6] = [
        "ABS",
        "LINEAR(c)",
        "VEE(a,b)",
        "SQRT_ABS",
        "IRR_INDICATOR",
        "SHIFTED",
    ];

    pub fn parse(text: &str) -> Result<GalleryEntry, String> {
        let text = text.trim();
        let (head, args) = match text.find('(') {
            Some(i) => {
                let inner = text[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("missing `)` in `{}`", text))?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        num::parse_rational(a.trim())
                            .ok_or_else(|| format!("bad rational argument `{}`", a.trim()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (&text[..i], args)
            }
            None => (text, Vec::new()),
        };
        let entry = match (head.trim().to_ascii_uppercase().as_str(), args.len()) {
            ("ABS", 0) => GalleryEntry::Abs,
            ("SQRT_ABS", 0) => GalleryEntry::SqrtAbs,
            ("IRR_INDICATOR", 0) => GalleryEntry::IrrIndicator,
            ("SHIFTED", 0) => GalleryEntry::Shifted,
            ("LINEAR", 1) => GalleryEntry::Linear(args[0].clone()),
            ("VEE", 2) => {
                if args[0] < args[1] {
                    return Err(format!(
                        "VEE(a,b) needs a >= b, got a = {}, b = {}",
                        args[0], args[1]
                    ));
                }
                GalleryEntry::Vee(args[0].clone(), args[1].clone())
            }
            _ => return Err(format!("unknown gallery function `{}`", text)),
        };
        Ok(entry)
    }

    pub fn expr(&self) -> E {
        let t = || E::Var;
        match self {
            GalleryEntry::Abs => E::Abs(Box::new(t())),
            GalleryEntry::Linear(c) => E::scale(c.clone(), t()),
            GalleryEntry::Vee(a, b) => E::max(E::scale(a.clone(), t()), E::scale(b.clone(), t())),
            GalleryEntry::SqrtAbs => E::SqrtAbs(Box::new(t())),
            GalleryEntry::IrrIndicator => E::IndicatorIrr(Box::new(t())),
            GalleryEntry::Shifted => {
                E::PiecewiseZero(Box::new(E::add(t(), E::Const(Rational::one()))))
            }
        }
    }

    /// The full default list, with representative parameters.
    pub fn catalogue() -> Vec<GalleryEntry> {
        vec![
            GalleryEntry::Abs,
            GalleryEntry::Linear(num::ratio(1, 2)),
            GalleryEntry::Vee(num::int(2), num::int(1)),
            GalleryEntry::SqrtAbs,
            GalleryEntry::IrrIndicator,
            GalleryEntry::Shifted,
        ]
    }
}

impl fmt::Display for GalleryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalleryEntry::Abs => write!(f, "ABS"),
            GalleryEntry::Linear(c) => write!(f, "LINEAR({})", c),
            GalleryEntry::Vee(a, b) => write!(f, "VEE({},{})", a, b),
            GalleryEntry::SqrtAbs => write!(f, "SQRT_ABS"),
            GalleryEntry::IrrIndicator => write!(f, "IRR_INDICATOR"),
            GalleryEntry::Shifted => write!(f, "SHIFTED"),
        }
    }
}

pub fn gallery(name: &str) -> Result<E, String> {
    GalleryEntry::parse(name).map(|g| g.expr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_forms() {
        assert_eq!(gallery("VEE(2,1)").unwrap().to_string(), "max(2*t, 1*t)");
        assert_eq!(gallery("LINEAR(1/2)").unwrap().to_string(), "1/2*t");
        assert_eq!(gallery("SHIFTED").unwrap().to_string(), "piecewise_zero(t + 1)");
        assert_eq!(gallery("abs").unwrap().to_string(), "abs(t)");
        assert!(gallery("VEE(1,2)").is_err());
        assert!(gallery("LINEAR").is_err());
        assert!(gallery("NOPE").is_err());
        for g in GalleryEntry::catalogue() {
            assert_eq!(GalleryEntry::parse(&g.to_string()).unwrap(), g);
        }
    }
}
