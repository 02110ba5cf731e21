use std::cmp::Ordering;

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use super::{ratio_at, require_zero_at_origin, AsymptoticParams};
use crate::checkers::{sampled_sup_abs, value_at, WORK_PRECISION};
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Interval, RealElement};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    #[serde(serialize_with = "num::ser_rational")]
    pub epsilon: Rational,
    /// Sample with the smallest ratio; `S(b)/b <= beta_hat.hi + epsilon`.
    pub b: RealElement,
    /// Sampled bound on `|S|` over `[0, 2b]`.
    #[serde(serialize_with = "num::ser_rational")]
    pub k: Rational,
    /// `max(2b, K/epsilon)` with `2b` rounded up.
    #[serde(serialize_with = "num::ser_rational")]
    pub t0: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaEstimate {
    pub beta_hat: Interval,
    pub a_used: RealElement,
    pub trace: Vec<(RealElement, Interval)>,
    pub certification: Certification,
    pub independence_check: Vec<(RealElement, Interval)>,
    /// Every sampled ratio beyond `T0` is at most `beta_hat.hi + 2 epsilon`.
    pub tail_bound_holds: bool,
}

impl BetaEstimate {
    /// Recomputes `T0` from the other certification fields.
    pub fn recomputed_t0(&self) -> Rational {
        let c = &self.certification;
        let two_b = c.b.scale(&num::int(2)).enclose(WORK_PRECISION).hi().clone();
        two_b.max(&c.k / &c.epsilon)
    }

    /// Largest gap between the main estimate and the alternative-`a` reruns.
    pub fn independence_spread(&self) -> Rational {
        self.independence_check
            .iter()
            .map(|(_, iv)| {
                (iv.hi() - self.beta_hat.lo())
                    .abs()
                    .max((self.beta_hat.hi() - iv.lo()).abs())
            })
            .max()
            .unwrap_or_default()
    }
}

/// `a r^k` for `k >= 1` while below `t_max`, then `t_max` itself.
pub(crate) fn geometric_samples(a: &RealElement, params: &AsymptoticParams) -> Result<Vec<RealElement>> {
    let t_max = RealElement::rational(a.basis(), params.t_max.clone());
    let mut out = Vec::new();
    let mut t = a.scale(&params.ratio);
    while t.compare(&t_max)? == Ordering::Less {
        out.push(t.clone());
        t = t.scale(&params.ratio);
    }
    out.push(t_max);
    Ok(out)
}

fn ratio_scan(f: &FunctionExpr, a: &RealElement, params: &AsymptoticParams) -> Result<Vec<(RealElement, Interval)>> {
    if a.signum()? != Ordering::Greater {
        return Err(Error::Precondition(format!("a = {} must be positive", a)));
    }
    let ts = geometric_samples(a, params)?;
    ts.par_iter()
        .map(|t| Ok((t.clone(), ratio_at(f, t)?)))
        .collect()
}

fn running_inf(trace: &[(RealElement, Interval)]) -> Interval {
    let lo = trace.iter().map(|(_, r)| r.lo()).min().expect("nonempty trace");
    let hi = trace.iter().map(|(_, r)| r.hi()).min().expect("nonempty trace");
    Interval::hull(lo.clone(), hi.clone())
}

fn check_downward(beta: &Interval, params: &AsymptoticParams) -> Result<()> {
    if *beta.hi() < -params.divergence_threshold.clone() {
        return Err(Error::Diagnostic(format!(
            "ratios S(t)/t fall below -{} ({}); inconsistent with subadditivity",
            params.divergence_threshold, beta
        )));
    }
    Ok(())
}

/// `inf_{t > a} S(t)/t` over a geometric sample of `(a, t_max]`.
pub fn estimate_beta(
    f: &FunctionExpr,
    a: &RealElement,
    params: &AsymptoticParams,
) -> Result<BetaEstimate> {
    params.validate()?;
    require_zero_at_origin(f, a.basis())?;
    let trace = ratio_scan(f, a, params)?;
    let beta_hat = running_inf(&trace);
    check_downward(&beta_hat, params)?;

    let (b, _) = trace
        .iter()
        .min_by(|x, y| x.1.hi().cmp(y.1.hi()))
        .expect("nonempty trace");
    let zero = RealElement::zero(a.basis());
    let two_b = b.scale(&num::int(2));
    let k = sampled_sup_abs(f, &zero, &two_b, 6)?;
    let t0 = two_b
        .enclose(WORK_PRECISION)
        .hi()
        .clone()
        .max(&k / &params.epsilon);
    let limit = beta_hat.hi() + num::int(2) * &params.epsilon;
    let mut tail_bound_holds = true;
    for (t, r) in &trace {
        if *t.enclose(WORK_PRECISION).lo() > t0 && *r.hi() > limit {
            tail_bound_holds = false;
        }
    }

    let mut independence_check = Vec::new();
    for q in [num::ratio(1, 2), num::int(2)] {
        let alt = a.scale(&q);
        let tr = ratio_scan(f, &alt, params)?;
        independence_check.push((alt, running_inf(&tr)));
    }
    Ok(BetaEstimate {
        beta_hat,
        a_used: a.clone(),
        certification: Certification {
            epsilon: params.epsilon.clone(),
            b: b.clone(),
            k,
            t0,
        },
        trace,
        independence_check,
        tail_bound_holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaEstimate {
    /// `-beta` of the reflection `T(t) = S(-t)`.
    pub alpha: Interval,
    pub reflected: BetaEstimate,
    /// Sampled `sup_{z<0} S(z)/z` computed without reflecting.
    pub direct: Interval,
}

pub fn estimate_alpha(
    f: &FunctionExpr,
    a: &RealElement,
    params: &AsymptoticParams,
) -> Result<AlphaEstimate> {
    let reflected = estimate_beta(&f.reflect(), a, params)?;
    let alpha = reflected.beta_hat.neg();
    let zs = geometric_samples(a, params)?;
    let ratios: Vec<Interval> = zs
        .par_iter()
        .map(|t| {
            let z = t.neg();
            super::ratio_enclosure(&value_at(f, &z)?, &z)
        })
        .collect::<Result<_>>()?;
    let lo = ratios.iter().map(Interval::lo).max().expect("nonempty");
    let hi = ratios.iter().map(Interval::hi).max().expect("nonempty");
    Ok(AlphaEstimate {
        alpha,
        reflected,
        direct: Interval::hull(lo.clone(), hi.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::gallery;
    use crate::qspan::Basis;

    fn beta(name: &str, a: &str, params: &AsymptoticParams) -> BetaEstimate {
        let b = Basis::sqrt2();
        estimate_beta(&gallery(name).unwrap(), &RealElement::parse(&b, a).unwrap(), params).unwrap()
    }

    #[test]
    fn closed_forms() {
        let p = AsymptoticParams::default();
        assert_eq!(beta("ABS", "1", &p).beta_hat, Interval::point(num::int(1)));
        assert_eq!(beta("VEE(2,1)", "1", &p).beta_hat, Interval::point(num::int(2)));
        assert_eq!(beta("VEE(3,-1)", "sqrt2", &p).beta_hat, Interval::point(num::int(3)));
        assert_eq!(
            beta("LINEAR(1/2)", "1/2", &p).beta_hat,
            Interval::point(num::ratio(1, 2))
        );
        let e = beta("ABS", "1", &p);
        assert_eq!(e.recomputed_t0(), e.certification.t0);
        assert!(e.tail_bound_holds);
        assert_eq!(e.independence_spread(), num::int(0));
        assert!(e.trace.iter().any(|(t, _)| *t.enclose(64).lo() > e.certification.t0));
    }

    #[test]
    fn sqrt_ratio_decays() {
        let p = AsymptoticParams {
            t_max: num::int(1_000_000),
            ..AsymptoticParams::default()
        };
        let e = beta("SQRT_ABS", "1", &p);
        assert!(*e.beta_hat.hi() <= num::ratio(1, 1000));
        // the trace of t^(-1/2) is decreasing
        for w in e.trace.windows(2) {
            assert!(w[1].1.hi() <= w[0].1.hi());
        }
    }

    #[test]
    fn alpha_examples() {
        let b = Basis::sqrt2();
        let one = RealElement::integer(&b, 1);
        let p = AsymptoticParams::default();
        let al = |n: &str| estimate_alpha(&gallery(n).unwrap(), &one, &p).unwrap();
        assert_eq!(al("ABS").alpha, Interval::point(num::int(-1)));
        assert_eq!(al("VEE(2,1)").alpha, Interval::point(num::int(1)));
        let l = al("LINEAR(-5/3)");
        assert_eq!(l.alpha, Interval::point(num::ratio(-5, 3)));
        assert_eq!(l.direct, l.alpha);
    }
}
