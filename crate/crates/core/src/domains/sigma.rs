use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed};
use serde::Serialize;

use super::DomainError;
use crate::num::{self, Rational};
use crate::qspan::{Basis, RealElement};

/// Indexed interval families; the cutoff only bounds what is materialised.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaFamily {
    /// `(2^-k - 4^-k, 2^-k)`, `k = 1..=cutoff`.
    Dyadic { cutoff: u32 },
    /// `(r^k (1 - w), r^k)`, `k = 1..=cutoff`, with `0 < r < 1`, `0 < w < 1 - r`.
    Geometric {
        #[serde(serialize_with = "crate::num::ser_rational")]
        ratio: Rational,
        #[serde(serialize_with = "crate::num::ser_rational")]
        width: Rational,
        cutoff: u32,
    },
}

pub const DEFAULT_SIGMA_CUTOFF: u32 = 40;

#[derive(Clone, Debug, Serialize)]
pub struct SigmaSet {
    intervals: Vec<(RealElement, RealElement)>,
    accumulates_at_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<SigmaFamily>,
}

impl SigmaSet {
    /// Finite union of open intervals in `(0, ∞)`. Overlaps are merged when
    /// `merge` is set and rejected otherwise.
    pub fn new(
        intervals: Vec<(RealElement, RealElement)>,
        merge: bool,
    ) -> Result<SigmaSet, DomainError> {
        let mut ivs = Vec::with_capacity(intervals.len());
        for (l, r) in intervals {
            if l.signum()? == Ordering::Less {
                return Err(DomainError::Sigma(format!(
                    "interval ({}, {}) is not contained in (0, inf)",
                    l, r
                )));
            }
            if l.compare(&r)? != Ordering::Less {
                return Err(DomainError::Sigma(format!("interval ({}, {}) is empty", l, r)));
            }
            ivs.push((l, r));
        }
        let mut err = None;
        ivs.sort_by(|a, b| {
            a.0.compare(&b.0).unwrap_or_else(|e| {
                err.get_or_insert(e);
                Ordering::Equal
            })
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        let mut out: Vec<(RealElement, RealElement)> = Vec::new();
        for (l, r) in ivs {
            if let Some(last) = out.last_mut() {
                if l.compare(&last.1)? == Ordering::Less {
                    if !merge {
                        return Err(DomainError::Sigma(format!(
                            "intervals ({}, {}) and ({}, {}) overlap",
                            last.0, last.1, l, r
                        )));
                    }
                    if r.compare(&last.1)? == Ordering::Greater {
                        last.1 = r;
                    }
                    continue;
                }
            }
            out.push((l, r));
        }
        let accumulates_at_zero = out.iter().any(|(l, _)| l.is_zero());
        Ok(SigmaSet {
            intervals: out,
            accumulates_at_zero,
            family: None,
        })
    }

    pub fn from_family(basis: &Arc<Basis>, family: SigmaFamily) -> Result<SigmaSet, DomainError> {
        let mut ivs = Vec::new();
        match &family {
            SigmaFamily::Dyadic { cutoff } => {
                for k in 1..=*cutoff {
                    let r = num::inv_pow2(k);
                    let l = &r - num::inv_pow2(2 * k);
                    ivs.push((l, r));
                }
            }
            SigmaFamily::Geometric {
                ratio,
                width,
                cutoff,
            } => {
                let one = Rational::one();
                if !ratio.is_positive() || *ratio >= one {
                    return Err(DomainError::Sigma("geometric ratio must lie in (0, 1)".into()));
                }
                if !width.is_positive() || *width >= &one - ratio {
                    return Err(DomainError::Sigma(
                        "geometric width must lie in (0, 1 - ratio)".into(),
                    ));
                }
                let mut r = ratio.clone();
                for _ in 1..=*cutoff {
                    ivs.push((&r * (&one - width), r.clone()));
                    r = &r * ratio;
                }
            }
        }
        let ivs = ivs
            .into_iter()
            .map(|(l, r)| (RealElement::rational(basis, l), RealElement::rational(basis, r)))
            .collect();
        let mut s = SigmaSet::new(ivs, false)?;
        // left endpoints tend to 0 in closed form
        s.accumulates_at_zero = true;
        s.family = Some(family);
        Ok(s)
    }

    pub fn dyadic(basis: &Arc<Basis>) -> SigmaSet {
        SigmaSet::from_family(
            basis,
            SigmaFamily::Dyadic {
                cutoff: DEFAULT_SIGMA_CUTOFF,
            },
        )
        .expect("dyadic family is valid")
    }

    /// `dyadic`, `dyadic(K)`, `geometric(r, w, K)` or an explicit list
    /// `(a, b), (c, d)` of element literals.
    pub fn parse(basis: &Arc<Basis>, text: &str) -> Result<SigmaSet, DomainError> {
        let t = text.trim();
        let bad = || DomainError::Syntax(format!("cannot read sigma set `{}`", text));
        if let Some(rest) = t.strip_prefix("dyadic") {
            let rest = rest.trim();
            let cutoff = if rest.is_empty() {
                DEFAULT_SIGMA_CUTOFF
            } else {
                rest.strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse().ok())
                    .ok_or_else(bad)?
            };
            return SigmaSet::from_family(basis, SigmaFamily::Dyadic { cutoff });
        }
        if let Some(rest) = t.strip_prefix("geometric") {
            let args: Vec<&str> = rest
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(bad)?
                .split(',')
                .map(str::trim)
                .collect();
            if args.len() != 3 {
                return Err(bad());
            }
            let ratio = num::parse_rational(args[0]).ok_or_else(bad)?;
            let width = num::parse_rational(args[1]).ok_or_else(bad)?;
            let cutoff = args[2].parse().map_err(|_| bad())?;
            return SigmaSet::from_family(
                basis,
                SigmaFamily::Geometric {
                    ratio,
                    width,
                    cutoff,
                },
            );
        }
        let mut ivs = Vec::new();
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(bad)?;
            let close = matching_paren(open).ok_or_else(bad)?;
            let body = &open[..close];
            let (l, r) = body.split_once(',').ok_or_else(bad)?;
            ivs.push((
                RealElement::parse(basis, l.trim())?,
                RealElement::parse(basis, r.trim())?,
            ));
            rest = open[close + 1..].trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        if ivs.is_empty() {
            return Err(bad());
        }
        SigmaSet::new(ivs, false)
    }

    pub fn intervals(&self) -> &[(RealElement, RealElement)] {
        &self.intervals
    }

    pub fn accumulates_at_zero(&self) -> bool {
        self.accumulates_at_zero
    }

    pub fn family(&self) -> Option<&SigmaFamily> {
        self.family.as_ref()
    }

    /// Exact membership in the union of open intervals.
    pub fn contains(&self, x: &RealElement) -> Result<bool, DomainError> {
        for (l, r) in &self.intervals {
            if x.compare(l)? == Ordering::Greater && x.compare(r)? == Ordering::Less {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Per interval: its midpoint, and when the basis has an irrational
    /// constant `c`, an irrational point `m ± (w/4)(frac(c) - 1/2)`, ordered
    /// by decreasing position.
    pub fn sample_points(&self) -> Result<Vec<RealElement>, DomainError> {
        let mut out = Vec::new();
        for (l, r) in self.intervals.iter().rev() {
            let mid = l.add(r)?.scale(&num::ratio(1, 2));
            let width = r.sub(l)?.enclose(64).lo().clone();
            out.push(mid.clone());
            let basis = l.basis();
            if let Some(i) = basis.first_irrational() {
                let c = RealElement::unit(basis, i, Rational::one());
                let fl = num::floor(c.enclose(64).lo());
                let frac = c
                    .add_rational(&(-Rational::from_integer(fl) - num::ratio(1, 2)))
                    .scale(&(&width / num::int(4)));
                let mut p = mid.add(&frac)?;
                if p.is_rational() {
                    p = mid.sub(&frac)?;
                }
                out.push(p);
            }
        }
        // drop degenerate midpoints that landed outside (zero-width enclosures)
        let mut kept = Vec::with_capacity(out.len());
        for p in out {
            if self.contains(&p)? {
                kept.push(p);
            }
        }
        Ok(kept)
    }
}

/// Index of the `)` closing an already-consumed `(`.
fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' if depth == 0 => return Some(i),
            ')' => depth -= 1,
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_examples() {
        let b = Basis::sqrt2();
        let d = SigmaSet::from_family(&b, SigmaFamily::Dyadic { cutoff: 20 }).unwrap();
        assert!(d.accumulates_at_zero());
        assert_eq!(d.intervals().len(), 20);
        let one = SigmaSet::parse(&b, "(1, 2)").unwrap();
        assert!(!one.accumulates_at_zero());
        assert!(SigmaSet::parse(&b, "(-1, 1)").is_err());
        assert!(SigmaSet::parse(&b, "(0, 1)").unwrap().accumulates_at_zero());
        let nested = SigmaSet::parse(&b, "((1/2)*sqrt2, 1), (2, 3)").unwrap();
        assert_eq!(nested.intervals().len(), 2);
        assert!(SigmaSet::parse(&b, "(1, 3), (2, 4)").is_err());
        let merged = SigmaSet::new(
            vec![
                (RealElement::integer(&b, 1), RealElement::integer(&b, 3)),
                (RealElement::integer(&b, 2), RealElement::integer(&b, 4)),
            ],
            true,
        )
        .unwrap();
        assert_eq!(merged.intervals().len(), 1);
        assert!(SigmaSet::parse(&b, "geometric(1/3, 1/2, 10)").unwrap().accumulates_at_zero());
        assert!(SigmaSet::parse(&b, "geometric(1/3, 3/4, 10)").is_err());
    }

    #[test]
    fn samples_lie_inside_and_include_irrationals() {
        let b = Basis::sqrt2();
        let d = SigmaSet::dyadic(&b);
        let pts = d.sample_points().unwrap();
        assert_eq!(pts.len(), 2 * DEFAULT_SIGMA_CUTOFF as usize);
        assert!(pts.iter().any(|p| !p.is_rational()));
        for p in &pts {
            assert!(d.contains(p).unwrap());
        }
    }
}
