use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::beta::geometric_samples;
use super::{irrational_fraction, ratio_at, AsymptoticParams};
use crate::domains::SigmaSet;
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Basis, ExtReal, Interval, RealElement};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `limsup_{t↓0} S(t)/t`
    Plus,
    /// `liminf_{t↑0} S(t)/t`
    Minus,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaEstimate {
    pub side: Side,
    pub value: ExtReal,
    pub diverging: bool,
    /// Sup (plus side) or inf (minus side) of each trailing window, oldest first.
    pub windows: Vec<Interval>,
    pub trace: Vec<(RealElement, Interval)>,
}

fn sup(xs: &[Interval]) -> Interval {
    let lo = xs.iter().map(Interval::lo).max().expect("nonempty");
    let hi = xs.iter().map(Interval::hi).max().expect("nonempty");
    Interval::hull(lo.clone(), hi.clone())
}

fn inf(xs: &[Interval]) -> Interval {
    let lo = xs.iter().map(Interval::lo).min().expect("nonempty");
    let hi = xs.iter().map(Interval::hi).min().expect("nonempty");
    Interval::hull(lo.clone(), hi.clone())
}

/// Tail windows of `w` ratios (aligned to the end of the schedule) and the
/// divergence rule: three consecutive window extremes moving strictly away
/// and the last one beyond the threshold.
fn judge(
    side: Side,
    trace: Vec<(RealElement, Interval)>,
    params: &AsymptoticParams,
) -> Result<GammaEstimate> {
    if trace.is_empty() {
        return Err(Error::Precondition("empty schedule".into()));
    }
    let ratios: Vec<Interval> = trace.iter().map(|(_, r)| r.clone()).collect();
    let w = params.tail_window.min(ratios.len());
    let start = ratios.len() % w;
    let mut windows: Vec<Interval> = ratios[start..]
        .chunks(w)
        .map(|c| match side {
            Side::Plus => sup(c),
            Side::Minus => inf(c),
        })
        .collect();
    if windows.is_empty() {
        windows.push(match side {
            Side::Plus => sup(&ratios),
            Side::Minus => inf(&ratios),
        });
    }
    let n = windows.len();
    let threshold = &params.divergence_threshold;
    let diverging = n >= 3
        && match side {
            Side::Plus => {
                windows[n - 3].lo() < windows[n - 2].lo()
                    && windows[n - 2].lo() < windows[n - 1].lo()
                    && windows[n - 1].lo() > threshold
            }
            Side::Minus => {
                windows[n - 3].hi() > windows[n - 2].hi()
                    && windows[n - 2].hi() > windows[n - 1].hi()
                    && *windows[n - 1].hi() < -threshold.clone()
            }
        };
    let value = match (diverging, side) {
        (true, Side::Plus) => ExtReal::PlusInfinity,
        (true, Side::Minus) => ExtReal::MinusInfinity,
        (false, _) => ExtReal::Finite(windows[n - 1].clone()),
    };
    Ok(GammaEstimate {
        side,
        value,
        diverging,
        windows,
        trace,
    })
}

fn scan(f: &FunctionExpr, points: Vec<RealElement>) -> Result<Vec<(RealElement, Interval)>> {
    points
        .into_par_iter()
        .map(|t| {
            let r = ratio_at(f, &t)?;
            Ok((t, r))
        })
        .collect()
}

/// Schedule `t_k = ratio^-k` (and `t_k u` with `u` irrational when the
/// basis allows), mirrored to negative points for the minus side.
pub fn gamma_zero(
    f: &FunctionExpr,
    basis: &Arc<Basis>,
    side: Side,
    params: &AsymptoticParams,
) -> Result<GammaEstimate> {
    params.validate()?;
    let step = params.ratio.recip();
    let u = irrational_fraction(basis);
    let mut points = Vec::new();
    let mut t = RealElement::rational(basis, step.clone());
    for _ in 0..params.zero_steps {
        let signed = |x: RealElement| match side {
            Side::Plus => x,
            Side::Minus => x.neg(),
        };
        points.push(signed(t.clone()));
        if let Some(u) = &u {
            points.push(signed(u.scale(t.as_rational().expect("rational schedule"))));
        }
        t = t.scale(&step);
    }
    judge(side, scan(f, points)?, params)
}

/// Tail estimate of `limsup S(t)/t` along sample points of `Σ`.
pub fn gamma_sigma(
    f: &FunctionExpr,
    sigma: &SigmaSet,
    params: &AsymptoticParams,
) -> Result<GammaEstimate> {
    if !sigma.accumulates_at_zero() {
        return Err(Error::Precondition("sigma set does not accumulate at 0".into()));
    }
    judge(Side::Plus, scan(f, sigma.sample_points()?)?, params)
}

/// Sampled `sup_{t>a} S(t)/t`: points crowding `a` from the right, then the
/// geometric schedule out to `t_max`.
pub fn gamma_sup(f: &FunctionExpr, a: &RealElement, params: &AsymptoticParams) -> Result<Interval> {
    let mut points = Vec::new();
    let u = irrational_fraction(a.basis());
    for j in 1..=20 {
        let h = num::inv_pow2(j);
        points.push(a.add(&a.scale(&h))?);
        if let Some(u) = &u {
            if a.is_rational() {
                let off = u.scale(&(a.as_rational().expect("rational") * &h));
                points.push(a.add(&off)?);
            }
        }
    }
    points.extend(geometric_samples(a, params)?);
    let trace = scan(f, points)?;
    let ratios: Vec<Interval> = trace.into_iter().map(|(_, r)| r).collect();
    Ok(sup(&ratios))
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaProfile {
    pub values: Vec<(RealElement, Interval)>,
    /// `γ(a)` nonincreasing along the schedule, up to slack.
    pub nonincreasing: bool,
}

pub fn gamma_profile(
    f: &FunctionExpr,
    a_values: &[RealElement],
    params: &AsymptoticParams,
) -> Result<GammaProfile> {
    let values: Vec<(RealElement, Interval)> = a_values
        .iter()
        .map(|a| Ok((a.clone(), gamma_sup(f, a, params)?)))
        .collect::<Result<_>>()?;
    let slack: &Rational = &params.slack;
    let nonincreasing = values
        .windows(2)
        .all(|w| *w[1].1.lo() <= w[0].1.hi() + slack);
    Ok(GammaProfile {
        values,
        nonincreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::gallery;

    fn gz(name: &str, side: Side) -> GammaEstimate {
        let b = Basis::sqrt2();
        gamma_zero(&gallery(name).unwrap(), &b, side, &AsymptoticParams::default()).unwrap()
    }

    #[test]
    fn gamma_zero_examples() {
        assert_eq!(gz("ABS", Side::Plus).value, ExtReal::exact(num::int(1)));
        assert_eq!(gz("SQRT_ABS", Side::Plus).value, ExtReal::PlusInfinity);
        assert_eq!(gz("VEE(2,1)", Side::Minus).value, ExtReal::exact(num::int(1)));
        assert_eq!(gz("VEE(2,1)", Side::Plus).value, ExtReal::exact(num::int(2)));
        assert_eq!(gz("IRR_INDICATOR", Side::Plus).value, ExtReal::PlusInfinity);
        assert_eq!(gz("IRR_INDICATOR", Side::Minus).value, ExtReal::MinusInfinity);
        assert_eq!(gz("ABS", Side::Minus).value, ExtReal::exact(num::int(-1)));
    }

    #[test]
    fn gamma_sup_examples() {
        let b = Basis::sqrt2();
        let p = AsymptoticParams::default();
        let at = |name: &str, a: Rational| {
            gamma_sup(&gallery(name).unwrap(), &RealElement::rational(&b, a), &p).unwrap()
        };
        assert_eq!(at("ABS", num::int(1)), Interval::point(num::int(1)));
        assert_eq!(at("VEE(2,1)", num::ratio(1, 2)), Interval::point(num::int(2)));
        let s = at("SQRT_ABS", num::int(1));
        assert!(*s.hi() <= num::int(1) && *s.lo() > num::ratio(999_999, 1_000_000));
        let prof = gamma_profile(
            &gallery("SQRT_ABS").unwrap(),
            &[RealElement::integer(&b, 1), RealElement::integer(&b, 2), RealElement::integer(&b, 4)],
            &p,
        )
        .unwrap();
        assert!(prof.nonincreasing);
    }

    #[test]
    fn gamma_sigma_examples() {
        let b = Basis::sqrt2();
        let p = AsymptoticParams::default();
        let d = SigmaSet::dyadic(&b);
        let g = |n: &str| gamma_sigma(&gallery(n).unwrap(), &d, &p).unwrap().value;
        assert_eq!(g("ABS"), ExtReal::exact(num::int(1)));
        assert_eq!(g("IRR_INDICATOR"), ExtReal::PlusInfinity);
        assert_eq!(g("VEE(2,1)"), ExtReal::exact(num::int(2)));
        let far = SigmaSet::parse(&b, "(1, 2)").unwrap();
        assert!(gamma_sigma(&gallery("ABS").unwrap(), &far, &p).is_err());
    }
}
