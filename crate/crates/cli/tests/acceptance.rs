//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use subadd_core::asymptotics::{analyze, estimate_beta, gamma_zero, AsymptoticParams, Side};
use subadd_core::checkers::value_at;
use subadd_core::domains::{DenseSubgroup, GridSpec, SigmaSet};
use subadd_core::envelopes::{extend_from_subgroup, star_envelope, EnvelopeParams, EnvelopeVerdict};
use subadd_core::funcdsl::{certify_structure, evaluate_value, gallery, parse, GalleryEntry};
use subadd_core::num::{self, Rational};
use subadd_core::theorems::{
    counterexample_demo, half_line_samples, run_check, run_checks, CheckContext, CheckId, VerdictStatus,
};
use subadd_core::{Basis, ExtReal, Interval, RealElement};

const DEMO_SECONDS: f64 = 60.0;
const BETA_AGREEMENT: (i64, i64) = (1, 1_000_000);
const CHAIN_TOL: (i64, i64) = (1, 1_000_000);
const PROP1_TOL: (i64, i64) = (1, 1_000_000);
const PROP1_SAMPLES: usize = 1000;
const PROP1_N_MAX: u64 = 1000;
const EXTENSION_TOL: (i64, i64) = (1, 1_000_000);
const EXTENSION_POINTS: usize = 100;
const T5_TOL: (i64, i64) = (1, 1_000_000_000);
const DETERMINISM_RUNS: usize = 3;

type Outcome = Result<String, String>;

fn tol(t: (i64, i64)) -> Rational {
    num::ratio(t.0, t.1)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

/// `|a - b| <= t` for enclosures, taking the worst case.
fn close(a: &Interval, b: &Interval, t: &Rational) -> bool {
    (a.hi() - b.lo()).max(b.hi() - a.lo()) <= *t
}

fn c1_counterexample() -> Outcome {
    let start = Instant::now();
    let d = counterexample_demo().map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(d.grid_points > 0 && d.subadditivity.violations == 0, "certain subadditivity violations found")?;
    let h = &d.rational_homogeneity;
    ensure(h.violations == 0 && h.suspects == 0 && h.pairs_checked > 0, "homogeneity on Q not exact")?;
    let w = &d.homogeneity_witness;
    ensure(
        w.lhs.exact().is_some() && w.rhs.exact().is_some(),
        "witness values are not exact",
    )?;
    ensure(
        w.lhs.enclose(64).exact() == Some(&num::int(1)) && w.rhs.enclose(64).exact() == Some(&num::int(2)),
        "witness is not 1 vs 2",
    )?;
    let s = &d.star_at_sqrt2;
    ensure(s.verdict == EnvelopeVerdict::DivergingPlusInfinity, "S*(sqrt2) not diverging")?;
    ensure(s.n_max == 10_000 && s.partials.len() == 10_000, "wrong number of partials")?;
    for (n, v) in &s.partials {
        ensure(*v == Interval::point(num::int(*n as i64)), format!("partial at n = {} is {}", n, v))?;
    }
    ensure(
        d.star_at_half.value().and_then(Interval::exact) == Some(&Rational::default()),
        "S*(1/2) is not exactly 0",
    )?;
    ensure(secs <= DEMO_SECONDS, format!("took {:.1} s", secs))?;
    Ok(format!(
        "{} grid points, {} pairs, 0 violations; partials = n for n <= 10^4; {:.1} s",
        d.grid_points, d.subadditivity.pairs_checked, secs
    ))
}

fn c2_beta_independence() -> Outcome {
    let b = Basis::sqrt2();
    let p = AsymptoticParams::default();
    let agree = tol(BETA_AGREEMENT);
    for (name, closed) in [
        ("ABS", num::int(1)),
        ("LINEAR(1/2)", num::ratio(1, 2)),
        ("VEE(2,1)", num::int(2)),
        ("VEE(3,-1)", num::int(3)),
    ] {
        let f = gallery(name).map_err(e)?;
        let mut estimates = Vec::new();
        for a in [num::ratio(1, 2), num::int(1), num::int(2)] {
            let est = estimate_beta(&f, &RealElement::rational(&b, a.clone()), &p).map_err(e)?;
            ensure(est.tail_bound_holds, format!("{} at a = {}: tail bound fails", name, a))?;
            let t0 = &est.certification.t0;
            let limit = est.beta_hat.hi() + num::int(2) * &p.epsilon;
            for (t, r) in &est.trace {
                if t.enclose(64).lo() > t0 {
                    ensure(*r.hi() <= limit, format!("{}: ratio {} above beta + 2 eps at {}", name, r, t))?;
                }
            }
            let w = est.beta_hat.width();
            ensure(
                est.beta_hat.contains(&closed) || close(&est.beta_hat, &Interval::point(closed.clone()), &w),
                format!("{}: beta {} vs closed form {}", name, est.beta_hat, closed),
            )?;
            estimates.push(est.beta_hat);
        }
        for x in &estimates {
            for y in &estimates {
                ensure(close(x, y, &agree), format!("{}: {} vs {}", name, x, y))?;
            }
        }
    }
    Ok("4 functions x 3 values of a agree and match closed forms".into())
}

fn le(a: &ExtReal, b: &ExtReal, t: &Rational) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => *x.lo() <= y.hi() + t,
        _ => false,
    }
}

fn c3_prop2_chain() -> Outcome {
    let b = Basis::sqrt2();
    let p = AsymptoticParams::default();
    let t = tol(CHAIN_TOL);
    let mut names: Vec<String> = GalleryEntry::catalogue().iter().map(|g| g.to_string()).collect();
    names.extend(["VEE(3,-1)", "LINEAR(-5/3)"].map(String::from));
    let mut finite = 0;
    for name in &names {
        let f = gallery(name).map_err(e)?;
        if !certify_structure(&f).subadditive() {
            continue;
        }
        let r = analyze(&f, &b, None, &p).map_err(e)?;
        let (gm, gp) = (&r.gamma_minus.value, &r.gamma_plus.value);
        if gm.enclosure().is_none() || gp.enclosure().is_none() {
            continue;
        }
        finite += 1;
        let alpha = ExtReal::Finite(r.alpha.alpha.clone());
        let beta = ExtReal::Finite(r.beta.beta_hat.clone());
        ensure(
            le(gm, &alpha, &t) && le(&alpha, &beta, &t) && le(&beta, gp, &t),
            format!("{}: chain {} <= {} <= {} <= {} fails", name, gm, alpha, beta, gp),
        )?;
        if name == "VEE(2,1)" {
            let want = [1, 1, 2, 2].map(|k| Interval::point(num::int(k)));
            let got = [gm.enclosure().unwrap(), &r.alpha.alpha, &r.beta.beta_hat, gp.enclosure().unwrap()];
            for (g, w) in got.iter().zip(&want) {
                ensure(close(g, w, &t), format!("VEE(2,1): {} vs {}", g, w))?;
            }
        }
    }
    ensure(finite >= 4, format!("only {} functions with a finite chain", finite))?;
    Ok(format!("chain holds for {} functions; VEE(2,1) gives 1 <= 1 <= 2 <= 2", finite))
}

fn c4_prop1_chain() -> Outcome {
    let b = Basis::sqrt2();
    let p = AsymptoticParams::default();
    let t = tol(PROP1_TOL);
    let one = RealElement::integer(&b, 1);
    let ts = half_line_samples(&b, &num::int(100), PROP1_SAMPLES);
    for name in ["ABS", "VEE(2,1)"] {
        let f = gallery(name).map_err(e)?;
        let beta = estimate_beta(&f, &one, &p).map_err(e)?.beta_hat;
        let g = gamma_zero(&f, &b, Side::Plus, &p).map_err(e)?;
        let gamma = g.value.enclosure().ok_or(format!("{}: gamma+ infinite", name))?.clone();
        for x in &ts {
            let xe = x.enclose(64);
            let s = value_at(&f, x).map_err(e)?.enclose(64);
            let star = star_envelope(&f, x, PROP1_N_MAX, None).map_err(e)?.partial_sup();
            let lower = beta.mul(&xe);
            let upper = gamma.mul(&xe);
            ensure(
                lower.lo() - &t <= *s.hi()
                    && *s.lo() <= *star.hi()
                    && *star.lo() <= upper.hi() + &t,
                format!("{} at t = {}: {} / {} / {} / {}", name, x, lower, s, star, upper),
            )?;
        }
    }
    let ctx = CheckContext::new(&b);
    let v = run_check(CheckId::Prop1, &gallery("SQRT_ABS").map_err(e)?, &ctx).map_err(e)?;
    ensure(v.status == VerdictStatus::HypothesesNotMet, format!("SQRT_ABS PROP1: {}", v.status))?;
    let shs = v.hypothesis("SHS").ok_or("no SHS probe")?;
    ensure(shs.outcome == subadd_core::asymptotics::Holds::Fails, "SQRT_ABS SHS not flagged")?;
    Ok(format!("{} points each for ABS and VEE(2,1); SQRT_ABS fails SHS", ts.len()))
}

fn extension_points(basis: &std::sync::Arc<Basis>) -> Result<(Vec<RealElement>, Vec<RealElement>), String> {
    let a = DenseSubgroup::parse(basis, "Q<1, sqrt2>").map_err(e)?;
    let spec = GridSpec::symmetric(basis, num::int(2), 6).map_err(e)?;
    let grid: Vec<RealElement> = a.enumerate(&spec).map_err(e)?.into_iter().filter(|x| !x.is_zero()).collect();
    ensure(grid.len() >= EXTENSION_POINTS, "subgroup grid too small")?;
    let on: Vec<RealElement> = (0..EXTENSION_POINTS)
        .map(|i| grid[i * (grid.len() - 1) / (EXTENSION_POINTS - 1)].clone())
        .collect();
    let off = (0..EXTENSION_POINTS as i64)
        .map(|k| {
            let text = format!(
                "{}/5 + {}/3*sqrt2 + {}/7*sqrt3",
                k % 9 - 4,
                k % 5 - 2,
                if k % 2 == 0 { 1 + k % 6 } else { -(1 + k % 4) }
            );
            RealElement::parse(basis, &text).map_err(e)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((on, off))
}

fn c5_extension() -> Outcome {
    let b = Basis::sqrt2_sqrt3();
    let f = parse("3/7*t").map_err(e)?;
    let a = DenseSubgroup::parse(&b, "Q<1, sqrt2>").map_err(e)?;
    let ext = extend_from_subgroup(&f, &a, EnvelopeParams::default()).map_err(e)?;
    let t = tol(EXTENSION_TOL);
    let (on, off) = extension_points(&b)?;
    for x in &on {
        ensure(a.contains(x) == Some(true), format!("{} not in A", x))?;
        let p = ext.pair(x).map_err(e)?;
        let want = value_at(&f, x).map_err(e)?.enclose(64);
        ensure(
            p.snapped && p.upper == want && p.lower == want,
            format!("at {}: upper {} lower {} vs {}", x, p.upper, p.lower, want),
        )?;
    }
    let mut worst = Rational::default();
    for x in &off {
        ensure(a.contains(x) == Some(false), format!("{} unexpectedly in A", x))?;
        let p = ext.pair(x).map_err(e)?;
        // oracle: the linear function itself
        let want = x.scale(&num::ratio(3, 7)).enclose(64);
        for v in [&p.upper, &p.lower] {
            let d = (v.hi() - want.lo()).max(want.hi() - v.lo());
            worst = worst.max(d.clone());
            ensure(d <= t, format!("at {}: {} vs {}", x, v, want))?;
        }
        ensure(close(&p.upper, &p.lower, &t), format!("at {}: upper != lower", x))?;
    }
    Ok(format!(
        "{} subgroup points exact; {} off-subgroup points within {}",
        on.len(),
        off.len(),
        num::to_decimal(&worst, 9)
    ))
}

fn c6_t5_positive() -> Outcome {
    let b = Basis::sqrt2();
    let f = gallery("VEE(2,1)").map_err(e)?;
    ensure(f.is_exact_pipeline(), "VEE(2,1) is not on the exact pipeline")?;
    let ctx = CheckContext::new(&b)
        .with_subgroup(DenseSubgroup::rationals(&b))
        .with_sigma(SigmaSet::dyadic(&b));
    ensure(ctx.tol_for(&f) == tol(T5_TOL), "exact tolerance is not 1e-9")?;
    let v = run_check(CheckId::T5, &f, &ctx).map_err(e)?;
    ensure(v.status == VerdictStatus::VerifiedAtScale, format!("T5 VEE(2,1): {}", v.summary()))?;
    let ts = half_line_samples(&b, &ctx.params.t_span, ctx.params.t_samples);
    for x in &ts {
        let s = evaluate_value(&f, x, 64).map_err(e)?;
        let m = evaluate_value(&f, &x.neg(), 64).map_err(e)?;
        ensure(s.exact() == Some(&x.scale(&num::int(2))), format!("S({}) != 2t", x))?;
        ensure(m.exact() == Some(&x.neg()), format!("S(-{}) != -t", x))?;
    }
    Ok(format!("verified-at-scale; S(t) = 2t and S(-t) = -t exactly on {} samples", ts.len()))
}

fn c7_soundness() -> Outcome {
    let b = Basis::sqrt2();
    let ctx = CheckContext::new(&b)
        .with_subgroup(DenseSubgroup::rationals(&b))
        .with_sigma(SigmaSet::dyadic(&b));
    let mut runs = 0;
    for g in GalleryEntry::catalogue() {
        let f = g.expr();
        if !certify_structure(&f).subadditive() {
            continue;
        }
        for v in run_checks(&CheckId::ALL, &f, &ctx).map_err(e)? {
            runs += 1;
            ensure(v.status != VerdictStatus::Falsified, format!("{}: {}", g, v.summary()))?;
        }
    }
    let v = run_check(CheckId::T5, &gallery("IRR_INDICATOR").map_err(e)?, &ctx).map_err(e)?;
    ensure(v.status == VerdictStatus::HypothesesNotMet, format!("IRR T5: {}", v.status))?;
    ensure(v.conclusions_informational, "IRR T5 conclusions not informational")?;
    ensure(
        v.conclusions() == subadd_core::asymptotics::Holds::Fails,
        format!("IRR T5 conclusions: {:?}", v.conclusions()),
    )?;
    Ok(format!("{} verdicts, none falsified; IRR_INDICATOR T5 hypotheses-not-met, conclusions fail", runs))
}

fn run_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_subadd-lab")).args(args).output().map_err(e)?;
    ensure(out.status.code().is_some_and(|c| c <= 2), format!("{:?} exited with {:?}", args, out.status))?;
    Ok(out.stdout)
}

fn c8_determinism() -> Outcome {
    let commands: [&[&str]; 2] = [
        &["--format", "json", "check", "all", "VEE(2,1)", "--subgroup", "Q", "--sigma", "dyadic"],
        &["--format", "json", "envelope", "ABS", "--at", "1/2 + sqrt2", "--subgroup", "Q<1>"],
    ];
    let mut bytes = 0;
    for cmd in commands {
        let mut outputs = Vec::new();
        for _ in 0..DETERMINISM_RUNS {
            outputs.push(run_bin(cmd)?);
        }
        for jobs in ["1", "8"] {
            let mut args = vec!["--jobs", jobs];
            args.extend_from_slice(cmd);
            outputs.push(run_bin(&args)?);
        }
        ensure(outputs.iter().all(|o| *o == outputs[0]), format!("{:?}: outputs differ", cmd))?;
        bytes += outputs[0].len();
    }
    Ok(format!("{} runs per command byte-identical ({} bytes)", DETERMINISM_RUNS + 2, bytes))
}

const FUZZ: &str = include_str!("data/fuzz_exprs.txt");
const MALFORMED: &str = include_str!("data/malformed.txt");

fn c9_parser() -> Outcome {
    let mut sources: Vec<String> = GalleryEntry::catalogue().iter().map(|g| g.expr().to_string()).collect();
    let fuzz: Vec<&str> = FUZZ.lines().filter(|l| !l.trim().is_empty()).collect();
    ensure(fuzz.len() == 50, format!("{} fuzz expressions stored", fuzz.len()))?;
    sources.extend(fuzz.iter().map(|s| s.to_string()));
    for s in &sources {
        let first = parse(s).map_err(|err| format!("`{}`: {}", s, err))?;
        let printed = first.to_string();
        let again = parse(&printed).map_err(|err| format!("`{}` reprinted as `{}`: {}", s, printed, err))?;
        ensure(again == first, format!("`{}` -> `{}` changes the tree", s, printed))?;
        ensure(again.to_string() == printed, format!("`{}` printing not stable", printed))?;
    }
    let bad: Vec<&str> = MALFORMED.lines().collect();
    ensure(bad.len() == 10, format!("{} malformed inputs stored", bad.len()))?;
    for s in &bad {
        match parse(s) {
            Ok(x) => return Err(format!("`{}` parsed as `{}`", s, x)),
            Err(err) => {
                ensure(err.position() <= s.chars().count(), format!("`{}`: position {} out of range", s, err.position()))?;
                ensure(err.to_string().contains(&format!("at {}", err.position())), format!("`{}`: {}", s, err))?;
            }
        }
    }
    Ok(format!("{} expressions round-trip; {} malformed inputs rejected with positions", sources.len(), bad.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("counterexample reproduction", c1_counterexample),
        ("beta independent of a", c2_beta_independence),
        ("gamma- <= alpha <= beta <= gamma+", c3_prop2_chain),
        ("beta t <= S <= S* <= gamma+ t", c4_prop1_chain),
        ("extension round trip", c5_extension),
        ("T5 positive case", c6_t5_positive),
        ("soundness", c7_soundness),
        ("determinism", c8_determinism),
        ("parser", c9_parser),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS [{}] {}: {} ({:.1} s)", i + 1, name, detail, secs),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {}: {} ({:.1} s)", i + 1, name, detail, secs);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
