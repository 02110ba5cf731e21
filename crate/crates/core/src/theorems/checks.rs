use rayon::prelude::*;

use super::probes::{self, judge_eq, judge_le, Probe, ProbeResult, Tally};
use super::{CheckContext, CheckId, Findings};
use crate::asymptotics::{
    analyze, estimate_alpha, estimate_beta, gamma_zero, irrational_fraction, Holds, Side,
};
use crate::domains::SigmaSet;
use crate::envelopes::star_envelope;
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{ExtReal, Interval, RealElement};
use crate::{Error, Result};

const SIGMA_NOTE: &str =
    "sigma is a finite union of open intervals; the local Steinhaus-Weil property of open sets is assumed, not probed";
const SEQUENCE_NOTE: &str =
    "the sequence hypothesis is existential: a failing probe on the supplied sequence is reported as inconclusive";
const BM_NOTE: &str = "Baire/measurability is not checkable; local boundedness stands in for it";

/// Conclusions that cannot be evaluated (e.g. `S(0) != 0`) become a single
/// inconclusive probe.
fn guarded(f: impl FnOnce() -> Result<Vec<Probe>>) -> Result<Vec<Probe>> {
    match f() {
        Ok(v) => Ok(v),
        Err(e @ (Error::Precondition(_) | Error::Diagnostic(_))) => Ok(vec![(
            ProbeResult::new("conclusions", Holds::Inconclusive, format!("not evaluated: {}", e)),
            Vec::new(),
        )]),
        Err(e) => Err(e),
    }
}

fn existential((mut p, ev): Probe) -> Probe {
    if p.outcome == Holds::Fails {
        p.outcome = Holds::Inconclusive;
        p.detail = format!("{} (failed on this sequence only)", p.detail);
    }
    (p, ev)
}

fn zero_sequence(ctx: &CheckContext) -> Result<Vec<RealElement>> {
    match &ctx.zero_sequence {
        Some(s) => Ok(s.clone()),
        None => probes::default_zero_sequence(&ctx.basis, probes::ZERO_STEPS),
    }
}

fn sigma_accumulates(sigma: &SigmaSet) -> Probe {
    let outcome = if sigma.accumulates_at_zero() {
        Holds::Holds
    } else {
        Holds::Fails
    };
    let detail = format!("{} intervals", sigma.intervals().len());
    (ProbeResult::new("sigma accumulates at 0", outcome, detail), Vec::new())
}

pub(crate) fn run(id: CheckId, f: &FunctionExpr, ctx: &CheckContext, tol: &Rational) -> Result<Findings> {
    let basis = &ctx.basis;
    let grid = probes::span_grid(ctx)?;
    let p = &ctx.params;
    let mut notes = Vec::new();
    let mut c_bound = None;
    let (hypotheses, conclusions) = match id {
        CheckId::T0 => {
            let seq = zero_sequence(ctx)?;
            notes.push(SEQUENCE_NOTE.to_string());
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::origin(f, basis)?,
                probes::right_limit(f, basis)?,
                existential(probes::sequence_limit(f, &seq, "S(z_n) -> 0")?),
            ];
            let concl = vec![continuity_of_s(f, ctx)?];
            (hyps, concl)
        }
        CheckId::T1 | CheckId::BmLite => {
            if id == CheckId::BmLite {
                notes.push(BM_NOTE.to_string());
            }
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::homogeneous("N-homogeneous", f, &grid, p.homogeneity_n, tol)?,
                probes::locally_bounded(f, basis)?,
            ];
            (hyps, half_line_linearity(f, ctx, tol)?)
        }
        CheckId::T2 => {
            let a = ctx.subgroup_for(id)?;
            let agrid = probes::subgroup_grid(a, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::additive_on(f, &agrid, tol)?,
            ];
            let concl = guarded(|| {
                let beta = estimate_beta(f, &RealElement::integer(basis, 1), &p.asymptotic)?.beta_hat;
                // the sampled beta carries the 2-epsilon certification margin
                let slack = tol + num::int(2) * &p.asymptotic.epsilon;
                let mut tally = Tally::new("S(a) = beta a on A");
                let vals: Vec<(RealElement, Interval)> = agrid
                    .par_iter()
                    .map(|a| Ok((a.clone(), probes::enclose_at(f, a)?)))
                    .collect::<Result<_>>()?;
                for (a, v) in &vals {
                    let want = beta.mul(&a.enclose(crate::checkers::WORK_PRECISION));
                    tally.record(judge_eq(v, &want, &slack), a, v, &want);
                }
                let mut ratios = Vec::new();
                for (a, v) in &vals {
                    if probes::is_positive(a)? {
                        ratios.push((a.clone(), probes::ratio(v, a)?));
                    }
                }
                Ok(vec![
                    tally.finish(format!("beta = {}", beta)),
                    probes::constant_ratio("S(a)/a constant on A+", &ratios, tol),
                ])
            })?;
            (hyps, concl)
        }
        CheckId::Thp => {
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
            ];
            let concl = guarded(|| {
                let e = estimate_beta(f, &RealElement::integer(basis, 1), &p.asymptotic)?;
                let spread = e.independence_spread();
                let margin = tol + num::int(2) * &p.asymptotic.epsilon;
                let indep = if spread <= *tol {
                    Holds::Holds
                } else if spread > margin {
                    Holds::Fails
                } else {
                    Holds::Inconclusive
                };
                let alts: Vec<String> = e
                    .independence_check
                    .iter()
                    .map(|(a, b)| format!("a = {}: {}", a, b))
                    .collect();
                let tail = if e.tail_bound_holds {
                    Holds::Holds
                } else {
                    Holds::Fails
                };
                Ok(vec![
                    (
                        ProbeResult::new(
                            "beta independent of a",
                            indep,
                            format!("a = 1: {}; {}; spread {}", e.beta_hat, alts.join("; "), spread),
                        ),
                        Vec::new(),
                    ),
                    (
                        ProbeResult::new(
                            "ratio <= beta + 2 epsilon beyond T0",
                            tail,
                            format!("T0 = {}, epsilon = {}", e.certification.t0, e.certification.epsilon),
                        ),
                        Vec::new(),
                    ),
                ])
            })?;
            (hyps, concl)
        }
        CheckId::T0Plus => {
            let sigma = ctx.sigma_for(id)?;
            notes.push(SIGMA_NOTE.to_string());
            let c = match &ctx.c_bound {
                Some(c) => Some(c.clone()),
                None => {
                    let g = crate::asymptotics::gamma_sigma(f, sigma, &p.asymptotic)?;
                    g.value
                        .enclosure()
                        .map(|iv| iv.hi() + &p.asymptotic.epsilon)
                }
            };
            c_bound = c.clone();
            let bound_probe = match &c {
                Some(c) => {
                    let mut tally = Tally::new("S(sigma) <= c sigma on sigma");
                    for s in sigma.sample_points()? {
                        let v = probes::enclose_at(f, &s)?;
                        let want = s.enclose(crate::checkers::WORK_PRECISION).scale(c);
                        tally.record(judge_le(&v, &want, tol), &s, &v, &want);
                    }
                    tally.finish(format!("c = {}", c))
                }
                None => (
                    ProbeResult::new(
                        "S(sigma) <= c sigma on sigma",
                        Holds::Fails,
                        "no finite c: gamma_sigma estimate diverges",
                    ),
                    Vec::new(),
                ),
            };
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::origin(f, basis)?,
                sigma_accumulates(sigma),
                bound_probe,
            ];
            let concl = guarded(|| {
                let Some(c) = &c else {
                    return Ok(vec![(
                        ProbeResult::new("S(x) <= c x", Holds::Inconclusive, "no finite c"),
                        Vec::new(),
                    )]);
                };
                let mut xs = probes::half_line_samples(basis, &p.t_span, p.t_samples);
                xs.extend(zero_sequence(ctx)?.iter().map(RealElement::neg));
                let mut tally = Tally::new("S(x) <= c x off sigma");
                let mut checked = 0;
                for x in &xs {
                    if sigma.contains(x)? {
                        continue;
                    }
                    checked += 1;
                    let v = probes::enclose_at(f, x)?;
                    let want = x.enclose(crate::checkers::WORK_PRECISION).scale(c);
                    tally.record(judge_le(&v, &want, tol), x, &v, &want);
                }
                let first = tally.finish(format!("c = {}, {} points off sigma", c, checked));
                Ok(vec![first, limsup_at_zero_plus(f, ctx)?])
            })?;
            (hyps, concl)
        }
        CheckId::Cor => {
            let sigma = ctx.sigma_for(id)?;
            notes.push(SIGMA_NOTE.to_string());
            let (whs, g) = probes::whs(f, sigma, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
                whs,
            ];
            c_bound = g.value.enclosure().map(|iv| iv.hi().clone());
            let concl = guarded(|| {
                let Some(gs) = g.value.enclosure() else {
                    return Ok(vec![(
                        ProbeResult::new("S(t) <= gamma_sigma t", Holds::Holds, "gamma_sigma = +inf: vacuous"),
                        Vec::new(),
                    )]);
                };
                let mut tally = Tally::new("S(t) <= gamma_sigma t");
                for t in probes::half_line_samples(basis, &p.t_span, p.t_samples) {
                    let v = probes::enclose_at(f, &t)?;
                    let want = t.enclose(crate::checkers::WORK_PRECISION).scale(gs.hi());
                    tally.record(judge_le(&v, &want, tol), &t, &v, &want);
                }
                let gp = gamma_zero(f, basis, Side::Plus, &p.asymptotic)?;
                let shs = match gp.value.enclosure() {
                    Some(iv) => judge_le(iv, gs, tol),
                    None => Holds::Fails,
                };
                Ok(vec![
                    tally.finish(format!("gamma_sigma = {}", gs)),
                    (
                        ProbeResult::new(
                            "gamma+ <= gamma_sigma",
                            shs,
                            format!("gamma+ = {}, gamma_sigma = {}", gp.value, gs),
                        ),
                        Vec::new(),
                    ),
                ])
            })?;
            (hyps, concl)
        }
        CheckId::Prop1 => {
            let ((shs, _), g) = probes::shs(f, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
                (shs, Vec::new()),
            ];
            let concl = guarded(|| prop1_chain(f, ctx, &g.value, tol))?;
            (hyps, concl)
        }
        CheckId::Prop2 => {
            let ((shs, _), _) = probes::shs(f, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
                (shs, Vec::new()),
            ];
            let concl = guarded(|| prop2_chain(f, ctx, tol))?;
            (hyps, concl)
        }
        CheckId::T4 => {
            let sigma = ctx.sigma_for(id)?;
            notes.push(SIGMA_NOTE.to_string());
            notes.push(SEQUENCE_NOTE.to_string());
            let (whs, _) = probes::whs(f, sigma, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
                whs,
                existential(star_along_sequence(f, ctx)?),
            ];
            let concl = guarded(|| {
                let n = p.star_n_max.min(256);
                let points = probes::continuity_points(basis);
                Ok(vec![
                    continuity_of_s(f, ctx)?,
                    probes::continuity("S* continuous", &points, &p.continuity_tol, |x| {
                        Ok(star_envelope(f, x, n, None)?.partial_sup())
                    })?,
                    star_linearity(f, ctx, tol)?,
                ])
            })?;
            (hyps, concl)
        }
        CheckId::T5 => {
            let a = ctx.subgroup_for(id)?;
            let sigma = ctx.sigma_for(id)?;
            notes.push(SIGMA_NOTE.to_string());
            let agrid = probes::subgroup_grid(a, ctx)?;
            let (whs, _) = probes::whs(f, sigma, ctx)?;
            let hyps = vec![
                probes::subadditive(f, &grid, tol)?,
                probes::locally_bounded(f, basis)?,
                probes::origin(f, basis)?,
                whs,
                probes::dense(a),
                probes::homogeneous("N-homogeneous on A", f, &agrid, p.homogeneity_n, tol)?,
            ];
            let concl = guarded(|| {
                let one = RealElement::integer(basis, 1);
                let beta = estimate_beta(f, &one, &p.asymptotic)?.beta_hat;
                let alpha = estimate_alpha(f, &one, &p.asymptotic)?.alpha;
                let (plus, _) = probes::signed_samples(ctx);
                let mut tp = Tally::new("S(t) = beta t");
                let mut tm = Tally::new("S(-t) = -alpha t");
                for t in &plus {
                    let te = t.enclose(crate::checkers::WORK_PRECISION);
                    let v = probes::enclose_at(f, t)?;
                    let want = beta.mul(&te);
                    tp.record(judge_eq(&v, &want, tol), t, &v, &want);
                    let m = t.neg();
                    let v = probes::enclose_at(f, &m)?;
                    let want = alpha.mul(&te).neg();
                    tm.record(judge_eq(&v, &want, tol), &m, &v, &want);
                }
                Ok(vec![
                    tp.finish(format!("beta = {}", beta)),
                    tm.finish(format!("alpha = {}", alpha)),
                ])
            })?;
            (hyps, concl)
        }
    };
    Ok(Findings {
        hypotheses,
        conclusions,
        c_bound,
        notes,
    })
}

fn continuity_of_s(f: &FunctionExpr, ctx: &CheckContext) -> Result<Probe> {
    let points = probes::continuity_points(&ctx.basis);
    probes::continuity("S continuous", &points, &ctx.params.continuity_tol, |x| {
        probes::enclose_at(f, x)
    })
}

fn half_line_linearity(f: &FunctionExpr, ctx: &CheckContext, tol: &Rational) -> Result<Vec<Probe>> {
    let (plus, minus) = probes::signed_samples(ctx);
    Ok(vec![
        probes::constant_ratio("S(t)/t constant on t > 0", &probes::half_line_ratios(f, &plus)?, tol),
        probes::constant_ratio("S(t)/t constant on t < 0", &probes::half_line_ratios(f, &minus)?, tol),
    ])
}

/// `limsup_{x -> 0+} S(x) <= 0`, on the tail of the mirrored zero sequence.
fn limsup_at_zero_plus(f: &FunctionExpr, ctx: &CheckContext) -> Result<Probe> {
    let seq = zero_sequence(ctx)?;
    let take = (seq.len() / 10).max(1);
    let mut tally = Tally::new("limsup S(x) <= 0 as x -> 0+");
    for z in &seq[seq.len() - take..] {
        let x = z.neg();
        let v = probes::enclose_at(f, &x)?;
        tally.record(judge_le(&v, &Interval::zero(), &ctx.params.zero_tol), &x, &v, &Interval::zero());
    }
    Ok(tally.finish(format!("tolerance {}", ctx.params.zero_tol)))
}

fn ext_le(a: &ExtReal, b: &ExtReal, tol: &Rational) -> Holds {
    match (a, b) {
        (ExtReal::MinusInfinity, _) | (_, ExtReal::PlusInfinity) => Holds::Holds,
        (ExtReal::PlusInfinity, _) | (_, ExtReal::MinusInfinity) => Holds::Fails,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => judge_le(x, y, tol),
    }
}

/// `beta t <= S(t) <= S*_partial(t) <= gamma+ t` on half-line samples.
pub(crate) fn prop1_chain(
    f: &FunctionExpr,
    ctx: &CheckContext,
    gamma_plus: &ExtReal,
    tol: &Rational,
) -> Result<Vec<Probe>> {
    let p = &ctx.params;
    let basis = &ctx.basis;
    let beta = estimate_beta(f, &RealElement::integer(basis, 1), &p.asymptotic)?.beta_hat;
    let ts = probes::half_line_samples(basis, &p.t_span, p.t_samples);
    let rows: Vec<(RealElement, Interval, Interval, Interval)> = ts
        .par_iter()
        .map(|t| {
            let te = t.enclose(crate::checkers::WORK_PRECISION);
            let s = probes::enclose_at(f, t)?;
            let star = star_envelope(f, t, p.star_n_max, None)?.partial_sup();
            Ok((t.clone(), te, s, star))
        })
        .collect::<Result<_>>()?;
    let mut lower = Tally::new("beta t <= S(t)");
    let mut dom = Tally::new("S(t) <= S*_partial(t)");
    let mut upper = Tally::new("S*_partial(t) <= gamma+ t");
    for (t, te, s, star) in &rows {
        let bt = beta.mul(te);
        lower.record(judge_le(&bt, s, tol), t, &bt, s);
        dom.record(judge_le(s, star, tol), t, s, star);
        match gamma_plus {
            ExtReal::Finite(g) => {
                let gt = g.mul(te);
                upper.record(judge_le(star, &gt, tol), t, star, &gt);
            }
            ExtReal::PlusInfinity => upper.record(Holds::Holds, t, star, star),
            ExtReal::MinusInfinity => upper.record(Holds::Fails, t, star, star),
        }
    }
    Ok(vec![
        lower.finish(format!("beta = {}", beta)),
        dom.finish(format!("n_max = {}", p.star_n_max)),
        upper.finish(format!("gamma+ = {}", gamma_plus)),
    ])
}

fn prop2_chain(f: &FunctionExpr, ctx: &CheckContext, tol: &Rational) -> Result<Vec<Probe>> {
    let p = &ctx.params;
    let r = analyze(f, &ctx.basis, None, &p.asymptotic)?;
    let alpha = ExtReal::Finite(r.alpha.alpha.clone());
    let beta = ExtReal::Finite(r.beta.beta_hat.clone());
    let link = |name: &str, a: &ExtReal, b: &ExtReal| -> Probe {
        (
            ProbeResult::new(name, ext_le(a, b, tol), format!("{} vs {}", a, b)),
            Vec::new(),
        )
    };
    let mut out = vec![
        link("gamma- <= alpha", &r.gamma_minus.value, &alpha),
        link("alpha <= beta", &alpha, &beta),
        link("beta <= gamma+", &beta, &r.gamma_plus.value),
    ];
    for (name, x, g) in [
        ("S*(1)/1 = gamma+", 1i64, &r.gamma_plus.value),
        ("S*(-1)/(-1) = gamma-", -1, &r.gamma_minus.value),
    ] {
        let xe = RealElement::integer(&ctx.basis, x);
        let star = probes::star_value(f, &xe, p.star_n_max)?;
        let (outcome, detail) = match (star, g) {
            (Some(v), ExtReal::Finite(g)) => {
                let v = v.scale(&num::int(x));
                (judge_eq(&v, g, tol), format!("{} vs {}", v, g))
            }
            (None, _) => (Holds::Inconclusive, "S* partials did not converge".to_string()),
            (Some(v), g) => (Holds::Fails, format!("{} vs {}", v, g)),
        };
        out.push((ProbeResult::new(name, outcome, detail), Vec::new()));
    }
    Ok(out)
}

/// `S*(t_n) -> 0` on the last terms of the sequence.
fn star_along_sequence(f: &FunctionExpr, ctx: &CheckContext) -> Result<Probe> {
    let seq = zero_sequence(ctx)?;
    let take = (seq.len() / 10).clamp(1, 8);
    let mut tally = Tally::new("S*(t_n) -> 0");
    for z in &seq[seq.len() - take..] {
        let (outcome, v) = match probes::star_value(f, z, ctx.params.star_n_max)? {
            Some(v) => (judge_eq(&v, &Interval::zero(), &ctx.params.zero_tol), v),
            None => (Holds::Inconclusive, star_envelope(f, z, ctx.params.star_n_max, None)?.partial_sup()),
        };
        tally.record(outcome, z, &v, &Interval::zero());
    }
    Ok(tally.finish(format!("tolerance {}", ctx.params.zero_tol)))
}

fn star_linearity(f: &FunctionExpr, ctx: &CheckContext, tol: &Rational) -> Result<Probe> {
    let basis = &ctx.basis;
    let mut pts: Vec<RealElement> = [num::ratio(1, 2), num::int(1), num::int(3)]
        .into_iter()
        .map(|q| RealElement::rational(basis, q))
        .collect();
    if let Some(u) = irrational_fraction(basis) {
        pts.push(u);
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut unresolved = false;
    for t in &pts {
        for (x, bucket) in [(t.clone(), &mut plus), (t.neg(), &mut minus)] {
            match probes::star_value(f, &x, ctx.params.star_n_max)? {
                Some(v) => bucket.push((x.clone(), probes::ratio(&v, &x)?)),
                None => unresolved = true,
            }
        }
    }
    if unresolved {
        return Ok((
            ProbeResult::new("S* linear on half-lines", Holds::Inconclusive, "S* partials did not converge"),
            Vec::new(),
        ));
    }
    let (a, mut ea) = probes::constant_ratio("S* linear on t > 0", &plus, tol);
    let (b, eb) = probes::constant_ratio("S* linear on t < 0", &minus, tol);
    ea.extend(eb);
    Ok((
        ProbeResult::new(
            "S* linear on half-lines",
            probes::combine([a.outcome, b.outcome]),
            format!("{}; {}", a.detail, b.detail),
        ),
        ea,
    ))
}
