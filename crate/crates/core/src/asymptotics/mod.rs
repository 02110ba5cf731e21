//! Sampled estimates of the growth constants of a function at ∞ and at 0.
//!
//! β and α come from ratio scans over geometric samples; the limits at 0
//! (γ±, γ^Σ) are one-sided tail estimates with a divergence flag, never
//! certified values.

mod beta;
mod gamma;

pub use beta::{estimate_alpha, estimate_beta, AlphaEstimate, BetaEstimate, Certification};
pub use gamma::{
    gamma_profile, gamma_sigma, gamma_sup, gamma_zero, GammaEstimate, GammaProfile, Side,
};

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::checkers::{value_at, WORK_PRECISION};
use crate::domains::SigmaSet;
use crate::funcdsl::{FunctionExpr, Value};
use crate::num::{self, Rational};
use crate::qspan::{Basis, ExtReal, Interval, RealElement};
use crate::{Error, Result};

/// Sampling schedules and thresholds; echoed into every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsymptoticParams {
    #[serde(serialize_with = "num::ser_rational")]
    pub t_max: Rational,
    /// Geometric growth factor of the sample schedule.
    #[serde(serialize_with = "num::ser_rational")]
    pub ratio: Rational,
    #[serde(serialize_with = "num::ser_rational")]
    pub epsilon: Rational,
    pub tail_window: usize,
    #[serde(serialize_with = "num::ser_rational")]
    pub divergence_threshold: Rational,
    /// Number of schedule points `t_k = ratio^-k` used towards 0.
    pub zero_steps: u32,
    #[serde(serialize_with = "num::ser_rational")]
    pub slack: Rational,
}

impl Default for AsymptoticParams {
    fn default() -> Self {
        AsymptoticParams {
            t_max: num::int(10_000),
            ratio: num::ratio(5, 4),
            epsilon: num::ratio(1, 1000),
            tail_window: 16,
            divergence_threshold: num::int(1_000_000),
            zero_steps: 160,
            slack: num::ratio(1, 1_000_000),
        }
    }
}

impl AsymptoticParams {
    pub fn validate(&self) -> Result<()> {
        if self.ratio <= Rational::one() {
            return Err(Error::Config("ratio must exceed 1".into()));
        }
        if self.t_max <= Rational::zero() || self.epsilon <= Rational::zero() {
            return Err(Error::Config("t_max and epsilon must be positive".into()));
        }
        if self.tail_window == 0 {
            return Err(Error::Config("tail_window must be positive".into()));
        }
        Ok(())
    }
}

/// Enclosure of `S(t)/t`; exact when `S(t)` is a rational multiple of `t`.
pub fn ratio_enclosure(v: &Value, t: &RealElement) -> Result<Interval> {
    if let Some(e) = v.exact() {
        if e.is_zero() {
            return Ok(Interval::zero());
        }
        if let Some(q) = e.ratio_to(t) {
            return Ok(Interval::point(q));
        }
    }
    let p = WORK_PRECISION + 16;
    let mut tp = t.enclose(p);
    let mut prec = p;
    while tp.contains_zero() && prec < t.basis().precision_cap() {
        prec *= 2;
        tp = t.enclose(prec);
    }
    v.enclose(p)
        .div(&tp)
        .ok_or_else(|| Error::Diagnostic(format!("cannot divide by an enclosure of {}", t)))
}

pub fn ratio_at(f: &FunctionExpr, t: &RealElement) -> Result<Interval> {
    ratio_enclosure(&value_at(f, t)?, t)
}

/// Errors unless `S(0) = 0` exactly.
pub fn require_zero_at_origin(f: &FunctionExpr, basis: &Arc<Basis>) -> Result<()> {
    let v = value_at(f, &RealElement::zero(basis))?;
    match v.exact() {
        Some(e) if e.is_zero() => Ok(()),
        _ => Err(Error::Precondition(format!(
            "S(0) = {} but S(0) = 0 is required",
            v.enclose(WORK_PRECISION)
        ))),
    }
}

/// `c / (floor(c) + 1)` in `(0, 1)` for the first irrational basis constant.
pub(crate) fn irrational_fraction(basis: &Arc<Basis>) -> Option<RealElement> {
    let i = basis.first_irrational()?;
    let c = RealElement::unit(basis, i, Rational::one());
    let fl = num::floor(c.enclose(64).lo()) + 1;
    Some(c.scale(&Rational::from_integer(fl).recip()))
}

/// Three-valued outcome of a sampled condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Holds {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    /// `None` when some member of the chain is infinite.
    pub holds: Option<bool>,
    pub links: Vec<(String, bool)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub params: AsymptoticParams,
    pub beta: BetaEstimate,
    pub alpha: AlphaEstimate,
    pub gamma_plus: GammaEstimate,
    pub gamma_minus: GammaEstimate,
    pub gamma_of_a: GammaProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_sigma: Option<GammaEstimate>,
    pub shs_holds: Holds,
    pub whs_holds: Holds,
    /// `γ⁻ <= α <= β <= γ⁺`, enclosure-wise up to slack.
    pub chain: ChainCheck,
}

impl AsymptoticReport {
    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("beta = {}", describe(&self.beta.beta_hat)),
            format!("alpha = {}", describe(&self.alpha.alpha)),
            format!("gamma+ = {}", describe_ext(&self.gamma_plus.value)),
            format!("gamma- = {}", describe_ext(&self.gamma_minus.value)),
        ];
        if let Some(g) = &self.gamma_sigma {
            out.push(format!("gamma_sigma = {}", describe_ext(&g.value)));
        }
        out.push(format!("SHS: {:?}", self.shs_holds).to_lowercase());
        out.push(format!("WHS: {:?}", self.whs_holds).to_lowercase());
        out.push(match self.chain.holds {
            Some(true) => "chain gamma- <= alpha <= beta <= gamma+: holds".into(),
            Some(false) => "chain gamma- <= alpha <= beta <= gamma+: FAILS".into(),
            None => "chain gamma- <= alpha <= beta <= gamma+: not applicable (infinite member)".into(),
        });
        out
    }
}

/// `1` for a point interval, otherwise `~x.xxxxxx [lo, hi]`.
pub fn describe(iv: &Interval) -> String {
    match iv.exact() {
        Some(q) => q.to_string(),
        None => format!("~{} {}", num::to_decimal(&iv.midpoint(), 9), iv),
    }
}

pub fn describe_ext(x: &ExtReal) -> String {
    match x {
        ExtReal::Finite(iv) => describe(iv),
        other => other.to_string(),
    }
}

fn chain(
    gm: &ExtReal,
    alpha: &Interval,
    beta: &Interval,
    gp: &ExtReal,
    slack: &Rational,
) -> ChainCheck {
    let (Some(gm), Some(gp)) = (gm.enclosure(), gp.enclosure()) else {
        return ChainCheck {
            holds: None,
            links: Vec::new(),
        };
    };
    let le = |a: &Interval, b: &Interval| *a.lo() <= b.hi() + slack;
    let links = vec![
        ("gamma- <= alpha".to_string(), le(gm, alpha)),
        ("alpha <= beta".to_string(), le(alpha, beta)),
        ("beta <= gamma+".to_string(), le(beta, gp)),
    ];
    ChainCheck {
        holds: Some(links.iter().all(|(_, ok)| *ok)),
        links,
    }
}

/// Full set of invariants at the default `a = 1`.
pub fn analyze(
    f: &FunctionExpr,
    basis: &Arc<Basis>,
    sigma: Option<&SigmaSet>,
    params: &AsymptoticParams,
) -> Result<AsymptoticReport> {
    params.validate()?;
    let one = RealElement::integer(basis, 1);
    let beta = estimate_beta(f, &one, params)?;
    let alpha = estimate_alpha(f, &one, params)?;
    let gamma_plus = gamma_zero(f, basis, Side::Plus, params)?;
    let gamma_minus = gamma_zero(f, basis, Side::Minus, params)?;
    let a_values: Vec<RealElement> = [num::ratio(1, 2), num::int(1), num::int(2), num::int(4)]
        .into_iter()
        .map(|q| RealElement::rational(basis, q))
        .collect();
    let gamma_of_a = gamma_profile(f, &a_values, params)?;
    let gamma_sigma = match sigma {
        Some(s) => Some(gamma_sigma(f, s, params)?),
        None => None,
    };
    let shs_holds = if gamma_plus.diverging {
        Holds::Fails
    } else {
        Holds::Holds
    };
    let whs_holds = match &gamma_sigma {
        Some(g) if g.diverging => Holds::Fails,
        Some(_) => Holds::Holds,
        None => Holds::Inconclusive,
    };
    let chain = chain(
        &gamma_minus.value,
        &alpha.alpha,
        &beta.beta_hat,
        &gamma_plus.value,
        &params.slack,
    );
    Ok(AsymptoticReport {
        params: params.clone(),
        beta,
        alpha,
        gamma_plus,
        gamma_minus,
        gamma_of_a,
        gamma_sigma,
        shs_holds,
        whs_holds,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::gallery;

    #[test]
    fn vee_chain_is_one_one_two_two() {
        let b = Basis::sqrt2();
        let r = analyze(&gallery("VEE(2,1)").unwrap(), &b, None, &AsymptoticParams::default())
            .unwrap();
        assert_eq!(r.gamma_minus.value, ExtReal::exact(num::int(1)));
        assert_eq!(r.alpha.alpha, Interval::point(num::int(1)));
        assert_eq!(r.beta.beta_hat, Interval::point(num::int(2)));
        assert_eq!(r.gamma_plus.value, ExtReal::exact(num::int(2)));
        assert_eq!(r.chain.holds, Some(true));
        assert_eq!(r.shs_holds, Holds::Holds);
        assert!(r.summary_lines().contains(&"beta = 2".to_string()));
    }

    #[test]
    fn origin_precondition() {
        let b = Basis::sqrt2();
        assert!(require_zero_at_origin(&gallery("SHIFTED").unwrap(), &b).is_ok());
        let g = crate::funcdsl::parse("abs(t) + 1").unwrap();
        assert!(matches!(require_zero_at_origin(&g, &b), Err(Error::Precondition(_))));
        assert!(estimate_beta(&g, &RealElement::integer(&b, 1), &AsymptoticParams::default()).is_err());
    }
}
