use std::cmp::Ordering;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{value_at, WORK_PRECISION};
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Interval, RealElement};
use crate::{Error, Result};

pub const DEFAULT_BOUND_LEVELS: u32 = 8;

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub window: (RealElement, RealElement),
    /// Upper bound on the sampled `|S|`.
    #[serde(serialize_with = "num::ser_rational")]
    pub m: Rational,
    pub samples: usize,
    pub suspected_unbounded: bool,
    /// Running bound after each refinement level.
    #[serde(serialize_with = "ser_levels")]
    pub levels: Vec<Rational>,
}

fn ser_levels<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(num::to_pq))
}

/// Level `l` adds the dyadic points `a + (b - a) j / 2^l` and, when the
/// basis has an irrational constant, one irrational point in every cell.
pub fn sample_window(a: &RealElement, b: &RealElement, level: u32) -> Result<Vec<RealElement>> {
    let span = b.sub(a)?;
    let cells = 1u64 << level;
    let mut out = Vec::new();
    for j in 0..=cells {
        if level > 0 && j % 2 == 0 {
            continue; // already present at a coarser level
        }
        out.push(a.add(&span.scale(&num::ratio(j as i64, cells as i64)))?);
    }
    let basis = a.basis();
    if let Some(i) = basis.first_irrational() {
        let c = RealElement::unit(basis, i, Rational::one());
        let fl = num::floor(c.enclose(64).lo());
        // frac(c) in (0, 1), scaled below one cell width
        let cell = span.enclose(64).lo().clone() / num::int(cells as i64);
        let offset = c.add_rational(&-Rational::from_integer(fl)).scale(&cell);
        for j in 0..cells {
            let base = a.add(&span.scale(&num::ratio(j as i64, cells as i64)))?;
            out.push(base.add(&offset)?);
        }
    }
    Ok(out)
}

/// Largest sampled `|S|` upper end over `[a, b]` through `levels`.
pub fn sampled_sup_abs(
    f: &FunctionExpr,
    a: &RealElement,
    b: &RealElement,
    levels: u32,
) -> Result<Rational> {
    Ok(check_local_boundedness(f, (a, b), levels)?.m)
}

pub fn check_local_boundedness(
    f: &FunctionExpr,
    window: (&RealElement, &RealElement),
    levels: u32,
) -> Result<BoundReport> {
    let (a, b) = window;
    if a.compare(b)? != Ordering::Less {
        return Err(Error::Precondition(format!("window [{}, {}] is degenerate", a, b)));
    }
    let mut m = Rational::zero();
    let mut history = Vec::new();
    let mut samples = 0;
    let mut doublings = 0;
    let mut suspected_unbounded = false;
    for level in 0..=levels {
        let pts = sample_window(a, b, level)?;
        let highs: Vec<Rational> = pts
            .par_iter()
            .map(|x| -> Result<Rational> {
                Ok(value_at(f, x)?.enclose(WORK_PRECISION).abs().hi().clone())
            })
            .collect::<Result<_>>()?;
        samples += pts.len();
        let prev = m.clone();
        for h in highs {
            if h > m {
                m = h;
            }
        }
        if level > 0 && m >= num::int(2) * &prev && m > prev {
            doublings += 1;
            if doublings >= 2 {
                suspected_unbounded = true;
            }
        } else {
            doublings = 0;
        }
        history.push(m.clone());
    }
    Ok(BoundReport {
        window: (a.clone(), b.clone()),
        m,
        samples,
        suspected_unbounded,
        levels: history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroLimitStatus {
    Satisfied,
    Failed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroLimitReport {
    pub status: ZeroLimitStatus,
    #[serde(serialize_with = "num::ser_rational")]
    pub tol: Rational,
    /// The tail actually judged: `(z, S(z))`.
    pub tail: Vec<(RealElement, Interval)>,
}

pub const DEFAULT_ZERO_TOL: (i64, i64) = (1, 100);
/// The last sequence element must be this close to 0.
pub const DEFAULT_ZERO_APPROACH: (i64, i64) = (1, 1000);

/// Tests `S(z_n) -> 0` along a strictly increasing negative sequence: the
/// last tenth of the sequence (at least one, at most 100 terms) is judged.
pub fn probe_zero_limit(
    f: &FunctionExpr,
    sequence: &[RealElement],
    tol: Option<&Rational>,
) -> Result<ZeroLimitReport> {
    let tol = tol
        .cloned()
        .unwrap_or_else(|| num::ratio(DEFAULT_ZERO_TOL.0, DEFAULT_ZERO_TOL.1));
    let last = sequence
        .last()
        .ok_or_else(|| Error::Precondition("empty sequence".into()))?;
    for w in sequence.windows(2) {
        if w[0].compare(&w[1])? != Ordering::Less {
            return Err(Error::Precondition(format!(
                "sequence not strictly increasing at {}",
                w[1]
            )));
        }
    }
    if last.signum()? != Ordering::Less {
        return Err(Error::Precondition("sequence must stay negative".into()));
    }
    let approach = num::ratio(DEFAULT_ZERO_APPROACH.0, DEFAULT_ZERO_APPROACH.1);
    if last.add_rational(&approach).signum()?.is_lt() {
        return Err(Error::Precondition(format!(
            "sequence ends at {}, not within {} of 0",
            last, approach
        )));
    }
    let take = (sequence.len() / 10).clamp(1, 100);
    let tail_points = &sequence[sequence.len() - take..];
    let tail: Vec<(RealElement, Interval)> = tail_points
        .par_iter()
        .map(|z| -> Result<(RealElement, Interval)> {
            Ok((z.clone(), value_at(f, z)?.enclose(WORK_PRECISION)))
        })
        .collect::<Result<_>>()?;
    let mut all_inside = true;
    let mut any_outside = false;
    for (_, v) in &tail {
        let a = v.abs();
        if *a.lo() > tol {
            any_outside = true;
        }
        if *a.hi() > tol {
            all_inside = false;
        }
    }
    let status = if any_outside {
        ZeroLimitStatus::Failed
    } else if all_inside {
        ZeroLimitStatus::Satisfied
    } else {
        ZeroLimitStatus::Inconclusive
    };
    Ok(ZeroLimitReport { status, tol, tail })
}
