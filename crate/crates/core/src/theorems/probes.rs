//! Hypothesis and conclusion probes shared by the checks.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::CheckContext;
use crate::asymptotics::{gamma_sigma, ratio_at, gamma_zero, irrational_fraction, GammaEstimate, Holds, Side};
use crate::checkers::{
    check_additive, check_homogeneity, check_local_boundedness, check_subadditive,
    probe_zero_limit, sample_window, value_at, CheckStatus, ViolationReport, ZeroLimitStatus,
    WORK_PRECISION,
};
use crate::domains::{sort_dedup, DenseSubgroup, GridSpec, SigmaSet};
use crate::envelopes::star_envelope;
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Basis, Interval, RealElement};
use crate::{Error, Result};

const MAX_EVIDENCE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub name: String,
    pub outcome: Holds,
    pub detail: String,
}

impl ProbeResult {
    pub fn new(name: &str, outcome: Holds, detail: impl Into<String>) -> Self {
        ProbeResult {
            name: name.to_string(),
            outcome,
            detail: detail.into(),
        }
    }
}

/// A point where a probe did not pass: `observed` should have matched
/// (or stayed below) `expected`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub probe: String,
    pub x: RealElement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<RealElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub observed: Interval,
    pub expected: Interval,
}

pub(crate) type Probe = (ProbeResult, Vec<Evidence>);

pub(crate) fn from_status(status: CheckStatus) -> Holds {
    match status {
        CheckStatus::NoViolation => Holds::Holds,
        CheckStatus::Violation => Holds::Fails,
        CheckStatus::Suspect => Holds::Inconclusive,
    }
}

fn from_report(name: &str, r: &ViolationReport) -> Probe {
    let evidence = r
        .witnesses
        .iter()
        .take(MAX_EVIDENCE)
        .map(|w| Evidence {
            probe: name.to_string(),
            x: w.x.clone(),
            y: w.y.clone(),
            n: w.n,
            observed: w.lhs.enclose(WORK_PRECISION),
            expected: w.rhs.enclose(WORK_PRECISION),
        })
        .collect();
    let detail = format!(
        "{} checked, {} violations, {} suspect",
        r.pairs_checked, r.violations, r.suspects
    );
    (ProbeResult::new(name, from_status(r.status), detail), evidence)
}

/// `observed <= expected + tol`, three-valued.
pub(crate) fn judge_le(observed: &Interval, expected: &Interval, tol: &Rational) -> Holds {
    if *observed.lo() > expected.hi() + tol {
        Holds::Fails
    } else if *observed.hi() <= expected.lo() + tol {
        Holds::Holds
    } else {
        Holds::Inconclusive
    }
}

/// `|observed - expected| <= tol`, three-valued.
pub(crate) fn judge_eq(observed: &Interval, expected: &Interval, tol: &Rational) -> Holds {
    let gap = (observed.lo() - expected.hi()).max(expected.lo() - observed.hi());
    let spread = (observed.hi() - expected.lo()).max(expected.hi() - observed.lo());
    if gap > *tol {
        Holds::Fails
    } else if spread <= *tol {
        Holds::Holds
    } else {
        Holds::Inconclusive
    }
}

pub(crate) fn combine(outcomes: impl IntoIterator<Item = Holds>) -> Holds {
    let mut acc = Holds::Holds;
    for o in outcomes {
        match o {
            Holds::Fails => return Holds::Fails,
            Holds::Inconclusive => acc = Holds::Inconclusive,
            Holds::Holds => {}
        }
    }
    acc
}

/// Collects per-point outcomes of one conclusion into a probe result.
pub(crate) struct Tally {
    name: String,
    outcomes: Vec<Holds>,
    evidence: Vec<Evidence>,
}

impl Tally {
    pub fn new(name: &str) -> Self {
        Tally {
            name: name.to_string(),
            outcomes: Vec::new(),
            evidence: Vec::new(),
        }
    }

    pub fn record(&mut self, outcome: Holds, x: &RealElement, observed: &Interval, expected: &Interval) {
        self.outcomes.push(outcome);
        if outcome != Holds::Holds && self.evidence.len() < MAX_EVIDENCE {
            self.evidence.push(Evidence {
                probe: self.name.clone(),
                x: x.clone(),
                y: None,
                n: None,
                observed: observed.clone(),
                expected: expected.clone(),
            });
        }
    }

    pub fn finish(self, detail: impl Into<String>) -> Probe {
        let outcome = combine(self.outcomes.iter().copied());
        let detail = format!("{} points; {}", self.outcomes.len(), detail.into());
        (ProbeResult::new(&self.name, outcome, detail), self.evidence)
    }
}

/// Evenly spaced grid thinned to at most `max` points, keeping both ends.
fn thin(grid: Vec<RealElement>, max: usize) -> Vec<RealElement> {
    if grid.len() <= max || max < 2 {
        return grid;
    }
    let n = grid.len();
    (0..max).map(|i| grid[i * (n - 1) / (max - 1)].clone()).collect()
}

/// Grid of the divisible span of the basis on `[-r, r]`.
pub(crate) fn span_grid(ctx: &CheckContext) -> Result<Vec<RealElement>> {
    let g = DenseSubgroup::full_span(&ctx.basis, true);
    subgroup_grid(&g, ctx)
}

pub(crate) fn subgroup_grid(a: &DenseSubgroup, ctx: &CheckContext) -> Result<Vec<RealElement>> {
    let p = &ctx.params;
    let spec = GridSpec::symmetric(a.basis(), p.grid_radius.clone(), p.grid_height)?;
    Ok(thin(a.enumerate(&spec)?, p.grid_max_points))
}

pub(crate) fn subadditive(f: &FunctionExpr, grid: &[RealElement], tol: &Rational) -> Result<Probe> {
    Ok(from_report("subadditive", &check_subadditive(f, grid, Some(tol))?))
}

pub(crate) fn homogeneous(
    name: &str,
    f: &FunctionExpr,
    grid: &[RealElement],
    n_max: u64,
    tol: &Rational,
) -> Result<Probe> {
    Ok(from_report(name, &check_homogeneity(f, grid, n_max, Some(tol))?))
}

pub(crate) fn additive_on(f: &FunctionExpr, grid: &[RealElement], tol: &Rational) -> Result<Probe> {
    Ok(from_report("additive on A", &check_additive(f, grid, Some(tol))?))
}

pub(crate) fn locally_bounded(f: &FunctionExpr, basis: &Arc<Basis>) -> Result<Probe> {
    let (a, b) = (RealElement::integer(basis, -1), RealElement::integer(basis, 1));
    let r = check_local_boundedness(f, (&a, &b), crate::checkers::DEFAULT_BOUND_LEVELS)?;
    let outcome = if r.suspected_unbounded {
        Holds::Fails
    } else {
        Holds::Holds
    };
    let detail = format!("sampled max |S| on [-1, 1] = {} over {} points", r.m, r.samples);
    Ok((ProbeResult::new("locally bounded", outcome, detail), Vec::new()))
}

pub(crate) fn origin(f: &FunctionExpr, basis: &Arc<Basis>) -> Result<Probe> {
    let v = value_at(f, &RealElement::zero(basis))?;
    let outcome = match v.exact() {
        Some(e) if e.is_zero() => Holds::Holds,
        Some(_) => Holds::Fails,
        None => judge_eq(&v.enclose(WORK_PRECISION), &Interval::zero(), &Rational::default()),
    };
    let detail = format!("S(0) = {}", v.enclose(WORK_PRECISION));
    Ok((ProbeResult::new("S(0) = 0", outcome, detail), Vec::new()))
}

/// `-2^-k` and `-u 2^-k` (`u` irrational in `(0, 1)`) for `k = 1..=steps`,
/// ascending towards 0.
pub fn default_zero_sequence(basis: &Arc<Basis>, steps: u32) -> Result<Vec<RealElement>> {
    let u = irrational_fraction(basis);
    let mut out = Vec::new();
    for k in 1..=steps {
        let t = num::inv_pow2(k);
        out.push(RealElement::rational(basis, -t.clone()));
        if let Some(u) = &u {
            out.push(u.scale(&-t));
        }
    }
    Ok(sort_dedup(out)?)
}

pub(crate) const ZERO_STEPS: u32 = 40;

/// `S(z_n) -> 0` along an ascending negative sequence.
pub(crate) fn sequence_limit(f: &FunctionExpr, seq: &[RealElement], name: &str) -> Result<Probe> {
    let r = probe_zero_limit(f, seq, None)?;
    let outcome = match r.status {
        ZeroLimitStatus::Satisfied => Holds::Holds,
        ZeroLimitStatus::Failed => Holds::Fails,
        ZeroLimitStatus::Inconclusive => Holds::Inconclusive,
    };
    let evidence = r
        .tail
        .iter()
        .filter(|(_, v)| *v.abs().hi() > r.tol)
        .take(MAX_EVIDENCE)
        .map(|(z, v)| Evidence {
            probe: name.to_string(),
            x: z.clone(),
            y: None,
            n: None,
            observed: v.clone(),
            expected: Interval::zero(),
        })
        .collect();
    let detail = format!("tail of {} terms within {} of 0", r.tail.len(), r.tol);
    Ok((ProbeResult::new(name, outcome, detail), evidence))
}

/// `S(0+) = 0`, judged on the mirrored default sequence.
pub(crate) fn right_limit(f: &FunctionExpr, basis: &Arc<Basis>) -> Result<Probe> {
    let seq = default_zero_sequence(basis, ZERO_STEPS)?;
    let (mut r, mut ev) = sequence_limit(&f.reflect(), &seq, "S(0+) = 0")?;
    for e in &mut ev {
        e.x = e.x.neg();
    }
    r.detail = format!("along t -> 0+: {}", r.detail);
    Ok((r, ev))
}

pub(crate) fn shs(f: &FunctionExpr, ctx: &CheckContext) -> Result<(Probe, GammaEstimate)> {
    let g = gamma_zero(f, &ctx.basis, Side::Plus, &ctx.params.asymptotic)?;
    let outcome = if g.diverging { Holds::Fails } else { Holds::Holds };
    let detail = format!("gamma+ estimate {}", g.value);
    Ok(((ProbeResult::new("SHS", outcome, detail), Vec::new()), g))
}

pub(crate) fn whs(f: &FunctionExpr, sigma: &SigmaSet, ctx: &CheckContext) -> Result<(Probe, GammaEstimate)> {
    let g = gamma_sigma(f, sigma, &ctx.params.asymptotic)?;
    let outcome = if g.diverging { Holds::Fails } else { Holds::Holds };
    let detail = format!("gamma_sigma estimate {}", g.value);
    Ok(((ProbeResult::new("WHS", outcome, detail), Vec::new()), g))
}

pub(crate) fn dense(a: &DenseSubgroup) -> Probe {
    let outcome = if a.is_dense() { Holds::Holds } else { Holds::Fails };
    (ProbeResult::new("A dense", outcome, a.to_string()), Vec::new())
}

/// Points `span * i / count` in `(0, span]`; every other one multiplied by
/// an irrational `u` when the basis has one.
pub fn half_line_samples(basis: &Arc<Basis>, span: &Rational, count: usize) -> Vec<RealElement> {
    let u = irrational_fraction(basis);
    (1..=count)
        .map(|i| {
            let t = span * num::ratio(i as i64, count as i64);
            match &u {
                Some(u) if i % 2 == 1 => u.scale(&t),
                _ => RealElement::rational(basis, t),
            }
        })
        .collect()
}

pub(crate) fn continuity_points(basis: &Arc<Basis>) -> Vec<RealElement> {
    let mut pts: Vec<RealElement> = [num::int(0), num::int(1), num::int(-1), num::ratio(3, 2)]
        .into_iter()
        .map(|q| RealElement::rational(basis, q))
        .collect();
    if let Some(u) = irrational_fraction(basis) {
        pts.push(u);
    }
    pts
}

const CONTINUITY_EXPONENTS: [u32; 5] = [8, 16, 24, 32, 40];

/// Oscillation of `g` over sampled windows `[x - δ, x + δ]`, `δ = 2^-k`:
/// holds when the last upper bound is within `tol`, fails when the last
/// lower bound exceeds `tol` and has not halved since the first window.
pub(crate) fn continuity<G>(name: &str, points: &[RealElement], tol: &Rational, g: G) -> Result<Probe>
where
    G: Fn(&RealElement) -> Result<Interval> + Sync,
{
    let mut tally = Tally::new(name);
    for x in points {
        let mut first_lo: Option<Rational> = None;
        let mut last = (Rational::default(), Rational::default());
        for k in CONTINUITY_EXPONENTS {
            let d = num::inv_pow2(k);
            let pts = sample_window(&x.add_rational(&-d.clone()), &x.add_rational(&d), 2)?;
            let vals: Vec<Interval> = pts.par_iter().map(&g).collect::<Result<_>>()?;
            let hi_max = vals.iter().map(Interval::hi).max().expect("nonempty");
            let lo_min = vals.iter().map(Interval::lo).min().expect("nonempty");
            let lo_max = vals.iter().map(Interval::lo).max().expect("nonempty");
            let hi_min = vals.iter().map(Interval::hi).min().expect("nonempty");
            let osc_hi = hi_max - lo_min;
            let osc_lo = (lo_max - hi_min).max(Rational::default());
            first_lo.get_or_insert(osc_lo.clone());
            last = (osc_lo, osc_hi);
        }
        let (osc_lo, osc_hi) = last;
        let first = first_lo.expect("at least one window");
        let outcome = if osc_hi <= *tol {
            Holds::Holds
        } else if osc_lo > *tol && num::int(2) * &osc_lo >= first {
            Holds::Fails
        } else {
            Holds::Inconclusive
        };
        tally.record(outcome, x, &Interval::hull(osc_lo, osc_hi), &Interval::hull(Rational::default(), tol.clone()));
    }
    Ok(tally.finish(format!("oscillation over delta = 2^-{}", CONTINUITY_EXPONENTS[4])))
}

/// `S*(x)` stand-in: the converged value, else `None`.
pub(crate) fn star_value(f: &FunctionExpr, x: &RealElement, n_max: u64) -> Result<Option<Interval>> {
    Ok(star_envelope(f, x, n_max, None)?.value().cloned())
}

/// Ratios `value(t)/t` over `points` all equal within `tol`.
pub(crate) fn constant_ratio(name: &str, ratios: &[(RealElement, Interval)], tol: &Rational) -> Probe {
    if ratios.is_empty() {
        return (ProbeResult::new(name, Holds::Inconclusive, "no points"), Vec::new());
    }
    let hi = ratios.iter().map(|(_, r)| r.hi()).max().expect("nonempty");
    let lo = ratios.iter().map(|(_, r)| r.lo()).min().expect("nonempty");
    let lo_max = ratios.iter().map(|(_, r)| r.lo()).max().expect("nonempty");
    let hi_min = ratios.iter().map(|(_, r)| r.hi()).min().expect("nonempty");
    let outcome = if hi - lo <= *tol {
        Holds::Holds
    } else if lo_max - hi_min > *tol {
        Holds::Fails
    } else {
        Holds::Inconclusive
    };
    let span = Interval::hull(lo.clone(), hi.clone());
    let mut evidence = Vec::new();
    if outcome != Holds::Holds {
        let (argmin, _) = ratios.iter().min_by(|a, b| a.1.hi().cmp(b.1.hi())).expect("nonempty");
        let (argmax, rmax) = ratios.iter().max_by(|a, b| a.1.lo().cmp(b.1.lo())).expect("nonempty");
        let rmin = &ratios.iter().find(|(x, _)| x == argmin).expect("present").1;
        evidence.push(Evidence {
            probe: name.to_string(),
            x: argmax.clone(),
            y: Some(argmin.clone()),
            n: None,
            observed: rmax.clone(),
            expected: rmin.clone(),
        });
    }
    (
        ProbeResult::new(name, outcome, format!("{} points, ratios in {}", ratios.len(), crate::asymptotics::describe(&span))),
        evidence,
    )
}

pub(crate) fn ratio(v: &Interval, t: &RealElement) -> Result<Interval> {
    v.div(&t.enclose(WORK_PRECISION + 16))
        .ok_or_else(|| Error::Diagnostic(format!("cannot divide by {}", t)))
}

pub(crate) fn enclose_at(f: &FunctionExpr, x: &RealElement) -> Result<Interval> {
    Ok(value_at(f, x)?.enclose(WORK_PRECISION))
}

/// Positive and negative samples for half-line checks.
pub(crate) fn signed_samples(ctx: &CheckContext) -> (Vec<RealElement>, Vec<RealElement>) {
    let plus = half_line_samples(&ctx.basis, &ctx.params.t_span, ctx.params.t_samples);
    let minus = plus.iter().map(RealElement::neg).collect();
    (plus, minus)
}

pub(crate) fn half_line_ratios(f: &FunctionExpr, pts: &[RealElement]) -> Result<Vec<(RealElement, Interval)>> {
    pts.par_iter()
        .map(|t| Ok((t.clone(), ratio_at(f, t)?)))
        .collect()
}

pub(crate) fn is_positive(x: &RealElement) -> Result<bool> {
    Ok(x.signum()? == Ordering::Greater)
}
