use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::asymptotics::Holds;
use crate::checkers::{check_additive, check_homogeneity, value_at, CheckStatus, WORK_PRECISION};
use crate::domains::{DenseSubgroup, GridSpec};
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Interval, RealElement};
use crate::{Error, Result};

pub const ONE_SIDED_NOTE: &str = "height-bounded enumeration undersamples the subgroup: \
     upper estimates are lower bounds of the true sup, lower estimates upper bounds of the true inf";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvelopeParams {
    /// `delta_k = 2^-k` for `k` in this range.
    pub delta_exponents: (u32, u32),
    /// `H_k = min(2^k, height_cap)`.
    pub height_cap: u64,
    pub max_points: usize,
    pub outer_budget: usize,
    #[serde(serialize_with = "num::ser_rational")]
    pub tol: Rational,
    /// Spread below which a subgroup point's pair is snapped to `S(x)`.
    #[serde(serialize_with = "num::ser_rational")]
    pub snap_tol: Rational,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams {
            delta_exponents: (4, 20),
            height_cap: 2048,
            max_points: 256,
            outer_budget: 64,
            tol: num::ratio(1, 1_000_000),
            snap_tol: num::ratio(1, 10_000),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitStep {
    #[serde(serialize_with = "num::ser_rational")]
    pub delta: Rational,
    pub height: u64,
    pub points: usize,
    pub sup: Option<Interval>,
    pub inf: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitEnvelopePair {
    pub x: RealElement,
    pub in_subgroup: bool,
    pub steps: Vec<LimitStep>,
    pub upper: Interval,
    pub lower: Interval,
    /// Sups nonincreasing and infs nondecreasing over nonempty steps.
    pub monotone: bool,
    /// The pair was set to the exact `S(x)` for `x` in the subgroup.
    pub snapped: bool,
    pub empty_steps: usize,
    pub note: &'static str,
}

impl LimitEnvelopePair {
    pub fn spread(&self) -> Rational {
        self.upper.hi() - self.lower.lo()
    }
}

fn bounds(values: &[Interval]) -> (Interval, Interval) {
    let mut sup = values[0].clone();
    let mut inf = values[0].clone();
    for v in &values[1..] {
        sup = sup.max(v);
        inf = inf.min(v);
    }
    (sup, inf)
}

/// Sup and inf of `S` over `A ∩ B_δ(x)` along the δ/height schedule.
/// The estimates are the last nonempty step; for `x` in `A` they are
/// replaced by the exact `S(x)` when the last three nonempty spreads shrink
/// and the last is below `snap_tol`.
pub fn upper_lower_limits(
    f: &FunctionExpr,
    a: &DenseSubgroup,
    x: &RealElement,
    params: &EnvelopeParams,
) -> Result<LimitEnvelopePair> {
    if !a.is_dense() {
        return Err(Error::Precondition(format!("{} is not dense", a)));
    }
    let (k0, k1) = params.delta_exponents;
    if k0 > k1 || k1 > 62 {
        return Err(Error::Config(format!("bad delta exponents {}..{}", k0, k1)));
    }
    let in_subgroup = a.contains(x) == Some(true);
    let sx = value_at(f, x)?;
    let mut steps = Vec::new();
    for k in k0..=k1 {
        let delta = num::inv_pow2(k);
        let height = (1u64 << k).min(params.height_cap);
        let mut pts = a
            .sample_ball(x, &delta, height, params.max_points, params.outer_budget)
            .map_err(Error::from)?;
        if in_subgroup && !pts.contains(x) {
            pts.push(x.clone());
        }
        let values: Vec<Interval> = pts
            .par_iter()
            .map(|p| Ok(value_at(f, p)?.enclose(WORK_PRECISION)))
            .collect::<Result<_>>()?;
        let (sup, inf) = if values.is_empty() {
            (None, None)
        } else {
            let (s, i) = bounds(&values);
            (Some(s), Some(i))
        };
        steps.push(LimitStep {
            delta,
            height,
            points: pts.len(),
            sup,
            inf,
        });
    }
    let nonempty: Vec<&LimitStep> = steps.iter().filter(|s| s.points > 0).collect();
    let last = nonempty
        .last()
        .ok_or_else(|| Error::Diagnostic(format!("no subgroup points near {} at any step", x)))?;
    let sups: Vec<&Interval> = nonempty.iter().filter_map(|s| s.sup.as_ref()).collect();
    let infs: Vec<&Interval> = nonempty.iter().filter_map(|s| s.inf.as_ref()).collect();
    let monotone = sups.windows(2).all(|w| w[1].lo() <= w[0].hi())
        && infs.windows(2).all(|w| w[1].hi() >= w[0].lo());
    let spreads: Vec<Rational> = nonempty
        .iter()
        .map(|s| s.sup.as_ref().expect("nonempty").hi() - s.inf.as_ref().expect("nonempty").lo())
        .collect();
    let n = spreads.len();
    let snapped = in_subgroup
        && n >= 3
        && spreads[n - 1] <= spreads[n - 2]
        && spreads[n - 2] <= spreads[n - 3]
        && spreads[n - 1] <= params.snap_tol;
    let (upper, lower) = if snapped {
        let v = sx.enclose(WORK_PRECISION);
        (v.clone(), v)
    } else {
        (
            last.sup.clone().expect("nonempty"),
            last.inf.clone().expect("nonempty"),
        )
    };
    Ok(LimitEnvelopePair {
        x: x.clone(),
        in_subgroup,
        empty_steps: steps.len() - nonempty.len(),
        steps,
        upper,
        lower,
        monotone,
        snapped,
        note: ONE_SIDED_NOTE,
    })
}

fn ser_display<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Hypothesis probes run before an extension is handed out.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionChecks {
    /// Running `max |S|` on `A ∩ [-1, 1]` by enumeration height.
    #[serde(serialize_with = "ser_levels")]
    pub bound_levels: Vec<(u64, Rational)>,
    pub homogeneous: Holds,
    pub additive: Holds,
}

fn ser_levels<S: Serializer>(v: &[(u64, Rational)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(h, m)| (h, num::to_pq(m))))
}

fn holds(status: CheckStatus) -> Holds {
    match status {
        CheckStatus::NoViolation => Holds::Holds,
        CheckStatus::Violation => Holds::Fails,
        CheckStatus::Suspect => Holds::Inconclusive,
    }
}

/// `S_A^±` of `f|A`, evaluated lazily and memoized by exact coordinates.
#[derive(Debug, Serialize)]
pub struct Extension {
    #[serde(skip)]
    f: FunctionExpr,
    #[serde(serialize_with = "ser_display")]
    subgroup: DenseSubgroup,
    params: EnvelopeParams,
    checks: ExtensionChecks,
    #[serde(skip)]
    memo: Mutex<HashMap<Vec<Rational>, Arc<LimitEnvelopePair>>>,
}

const BOUND_HEIGHTS: [u64; 4] = [2, 4, 8, 16];
const PROBE_HEIGHT: u64 = 3;

/// Refuses when `max |S|` over `A ∩ [-1, 1]` doubles at two consecutive
/// enumeration heights (local boundedness on `A` suspect).
pub fn extend_from_subgroup(
    f: &FunctionExpr,
    a: &DenseSubgroup,
    params: EnvelopeParams,
) -> Result<Extension> {
    if !a.is_dense() {
        return Err(Error::Precondition(format!("{} is not dense", a)));
    }
    if !a.divisible() {
        return Err(Error::Precondition(format!(
            "{} is not divisible; write Q<...> for its divisible hull",
            a
        )));
    }
    let basis = a.basis();
    let zero = RealElement::zero(basis);
    let mut bound_levels = Vec::new();
    let mut doublings = 0;
    let mut prev: Option<Rational> = None;
    for h in BOUND_HEIGHTS {
        let pts = a
            .sample_ball(&zero, &num::int(1), h, 1024, 64)
            .map_err(Error::from)?;
        let m = pts
            .par_iter()
            .map(|p| Ok(value_at(f, p)?.enclose(WORK_PRECISION).abs().hi().clone()))
            .collect::<Result<Vec<Rational>>>()?
            .into_iter()
            .max()
            .unwrap_or_default();
        let m = prev.as_ref().map_or(m.clone(), |p| p.clone().max(m));
        if let Some(p) = &prev {
            if m > num::int(2) * p && m > *p {
                doublings += 1;
                if doublings >= 2 {
                    return Err(Error::Precondition(format!(
                        "f is not locally bounded on {}: max |S| on [-1, 1] grew to {} by height {}",
                        a, m, h
                    )));
                }
            } else {
                doublings = 0;
            }
        }
        bound_levels.push((h, m.clone()));
        prev = Some(m);
    }
    let grid = a
        .enumerate(&GridSpec::symmetric(basis, num::int(1), PROBE_HEIGHT)?)
        .map_err(Error::from)?;
    let homogeneous = holds(check_homogeneity(f, &grid, 4, None)?.status);
    let additive = holds(check_additive(f, &grid, None)?.status);
    Ok(Extension {
        f: f.clone(),
        subgroup: a.clone(),
        params,
        checks: ExtensionChecks {
            bound_levels,
            homogeneous,
            additive,
        },
        memo: Mutex::new(HashMap::new()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearityAudit {
    /// `(x, S_A^+(x)/x, S_A^-(x)/x)` per sampled point.
    pub ratios: Vec<(RealElement, Interval, Interval)>,
    pub plus_slope: Option<Interval>,
    pub minus_slope: Option<Interval>,
    pub plus_constant: bool,
    pub minus_constant: bool,
    /// `|S_A^+(x) - S_A^-(x)| <= tol` at every point.
    pub upper_equals_lower: bool,
    #[serde(serialize_with = "num::ser_rational")]
    pub tol: Rational,
}

impl Extension {
    pub fn checks(&self) -> &ExtensionChecks {
        &self.checks
    }

    pub fn subgroup(&self) -> &DenseSubgroup {
        &self.subgroup
    }

    pub fn params(&self) -> &EnvelopeParams {
        &self.params
    }

    pub fn pair(&self, x: &RealElement) -> Result<Arc<LimitEnvelopePair>> {
        let key = x.coords().to_vec();
        if let Some(p) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(p.clone());
        }
        // computed outside the lock; a racing insert stores an identical value
        let pair = Arc::new(upper_lower_limits(&self.f, &self.subgroup, x, &self.params)?);
        Ok(self
            .memo
            .lock()
            .expect("memo lock")
            .entry(key)
            .or_insert(pair)
            .clone())
    }

    pub fn upper(&self, x: &RealElement) -> Result<Interval> {
        Ok(self.pair(x)?.upper.clone())
    }

    pub fn lower(&self, x: &RealElement) -> Result<Interval> {
        Ok(self.pair(x)?.lower.clone())
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }

    /// Ratio constancy of `S_A^±(x)/x` on each half-line over `points`
    /// (zero is skipped).
    pub fn linearity_audit(&self, points: &[RealElement]) -> Result<LinearityAudit> {
        let pairs: Vec<(RealElement, Arc<LimitEnvelopePair>)> = points
            .par_iter()
            .filter(|x| !x.is_zero())
            .map(|x| Ok((x.clone(), self.pair(x)?)))
            .collect::<Result<_>>()?;
        let tol = &self.params.tol;
        let mut ratios = Vec::new();
        let mut upper_equals_lower = true;
        let (mut plus, mut minus): (Vec<Interval>, Vec<Interval>) = (Vec::new(), Vec::new());
        for (x, p) in pairs {
            let xe = x.enclose(WORK_PRECISION + 16);
            let ru = p.upper.div(&xe).ok_or_else(|| Error::Diagnostic(format!("cannot divide by {}", x)))?;
            let rl = p.lower.div(&xe).ok_or_else(|| Error::Diagnostic(format!("cannot divide by {}", x)))?;
            if p.spread() > *tol {
                upper_equals_lower = false;
            }
            if xe.certainly_positive() {
                plus.push(ru.join(&rl));
            } else {
                minus.push(ru.join(&rl));
            }
            ratios.push((x, ru, rl));
        }
        let slope = |v: &[Interval]| v.iter().cloned().reduce(|a, b| a.join(&b));
        let plus_slope = slope(&plus);
        let minus_slope = slope(&minus);
        let flat = |s: &Option<Interval>| s.as_ref().is_none_or(|s| s.width() <= *tol);
        Ok(LinearityAudit {
            plus_constant: flat(&plus_slope),
            minus_constant: flat(&minus_slope),
            plus_slope,
            minus_slope,
            ratios,
            upper_equals_lower,
            tol: tol.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use num_traits::Signed;

    use super::*;
    use crate::funcdsl::gallery;
    use crate::qspan::Basis;

    fn el(b: &Arc<crate::Basis>, s: &str) -> RealElement {
        RealElement::parse(b, s).unwrap()
    }

    #[test]
    fn linear_on_rationals() {
        let b = Basis::sqrt2();
        let q = DenseSubgroup::rationals(&b);
        let p = EnvelopeParams::default();
        for x in ["1/3", "sqrt2", "-2 + 1/5*sqrt2"] {
            let x = el(&b, x);
            let r = upper_lower_limits(&gallery("LINEAR(5/2)").unwrap(), &q, &x, &p).unwrap();
            let want = x.scale(&num::ratio(5, 2)).enclose(80);
            // within slope * delta of the true value
            let slack = num::ratio(5, 2) * num::inv_pow2(20);
            assert!((r.upper.hi() - want.lo()).abs() <= slack);
            assert!((r.lower.lo() - want.hi()).abs() <= slack);
            assert!(*r.lower.lo() <= *r.upper.hi());
            assert!(r.monotone);
        }
    }

    #[test]
    fn subgroup_points_snap_to_the_function() {
        let b = Basis::sqrt2();
        let a = DenseSubgroup::parse(&b, "Q<1, sqrt2>").unwrap();
        let f = gallery("VEE(2,1)").unwrap();
        let p = EnvelopeParams::default();
        let r = upper_lower_limits(&f, &a, &el(&b, "3/2"), &p).unwrap();
        assert!(r.snapped && r.in_subgroup);
        assert_eq!(r.upper, Interval::point(num::int(3)));
        assert_eq!(r.lower, Interval::point(num::int(3)));
    }

    #[test]
    fn vee_at_sqrt2_brute_force() {
        // independent oracle: height-16 enumeration of A ∩ B_δ(√2) by brute force
        let b = Basis::sqrt2();
        let a = DenseSubgroup::parse(&b, "Q<1, sqrt2>").unwrap();
        let f = gallery("VEE(2,1)").unwrap();
        let x = el(&b, "sqrt2");
        let p = EnvelopeParams {
            delta_exponents: (4, 4),
            height_cap: 16,
            max_points: usize::MAX,
            outer_budget: usize::MAX,
            ..EnvelopeParams::default()
        };
        let r = upper_lower_limits(&f, &a, &x, &p).unwrap();
        let delta = num::ratio(1, 16);
        let (mut hi, mut lo) = (None::<RealElement>, None::<RealElement>);
        let mut coeffs = Vec::new();
        for q in 1..=16i64 {
            for pn in -16..=16i64 {
                coeffs.push(num::ratio(pn, q));
            }
        }
        coeffs.sort();
        coeffs.dedup();
        for c0 in &coeffs {
            for c1 in &coeffs {
                let t = RealElement::new(b.clone(), vec![c0.clone(), c1.clone()]).unwrap();
                let d = t.sub(&x).unwrap().abs().unwrap();
                if d.compare(&RealElement::rational(&b, delta.clone())).unwrap().is_le() {
                    let v = t.scale(&num::int(2));
                    if hi.as_ref().is_none_or(|h| v.compare(h).unwrap().is_gt()) {
                        hi = Some(v.clone());
                    }
                    if lo.as_ref().is_none_or(|l| v.compare(l).unwrap().is_lt()) {
                        lo = Some(v);
                    }
                }
            }
        }
        assert_eq!(r.upper, hi.unwrap().enclose(WORK_PRECISION));
        assert_eq!(r.lower, lo.unwrap().enclose(WORK_PRECISION));

        let fine = upper_lower_limits(&f, &a, &x, &EnvelopeParams::default()).unwrap();
        let want = x.scale(&num::int(2)).enclose(80);
        assert!((fine.upper.hi() - want.lo()).abs() <= num::ratio(1, 1_000_000));
        assert!((fine.lower.lo() - want.hi()).abs() <= num::ratio(1, 1_000_000));
    }

    #[test]
    fn extension_examples() {
        let b = Basis::sqrt2();
        let a = DenseSubgroup::parse(&b, "Q<1, sqrt2>").unwrap();
        let ext = extend_from_subgroup(&gallery("LINEAR(3/7)").unwrap(), &a, EnvelopeParams::default()).unwrap();
        assert_eq!(ext.checks().additive, Holds::Holds);
        let pts: Vec<RealElement> = ["1", "-1/2", "sqrt2", "2 - sqrt2"].iter().map(|s| el(&b, s)).collect();
        let audit = ext.linearity_audit(&pts).unwrap();
        assert!(audit.plus_constant && audit.minus_constant && audit.upper_equals_lower);
        assert_eq!(ext.upper(&pts[0]).unwrap(), Interval::point(num::ratio(3, 7)));
        assert_eq!(ext.memo_len(), 4);
        ext.upper(&pts[0]).unwrap();
        assert_eq!(ext.memo_len(), 4);

        let q = DenseSubgroup::rationals(&b);
        let ind = extend_from_subgroup(&gallery("IRR_INDICATOR").unwrap(), &q, EnvelopeParams::default()).unwrap();
        let s2 = el(&b, "sqrt2");
        assert_eq!(ind.upper(&s2).unwrap(), Interval::zero());
        assert_eq!(ind.lower(&s2).unwrap(), Interval::zero());

        let abs = extend_from_subgroup(&gallery("ABS").unwrap(), &q, EnvelopeParams::default()).unwrap();
        assert_eq!(abs.checks().additive, Holds::Fails);
        let audit = abs.linearity_audit(&[el(&b, "1/3"), el(&b, "2"), el(&b, "-5/4"), el(&b, "-7")]).unwrap();
        assert_eq!(audit.plus_slope, Some(Interval::point(num::int(1))));
        assert_eq!(audit.minus_slope, Some(Interval::point(num::int(-1))));
    }

    #[test]
    fn extension_refusals() {
        let b = Basis::sqrt2();
        let nd = DenseSubgroup::parse(&b, "<1, sqrt2>").unwrap();
        assert!(extend_from_subgroup(&gallery("ABS").unwrap(), &nd, EnvelopeParams::default()).is_err());
        let discrete = DenseSubgroup::new(vec![RealElement::integer(&b, 1)], false).unwrap();
        assert!(upper_lower_limits(&gallery("ABS").unwrap(), &discrete, &el(&b, "1"), &EnvelopeParams::default()).is_err());
    }
}
