//! One function per subcommand, each producing a `Report`.

use std::sync::Arc;

use serde_json::{json, Value};
use subadd_core::asymptotics::{analyze, describe, AsymptoticReport, GammaEstimate, Holds};
use subadd_core::checkers::{check_subadditive, CheckStatus, ViolationReport};
use subadd_core::domains::{DenseSubgroup, GridSpec, SigmaSet};
use subadd_core::envelopes::{
    extend_from_subgroup, star_envelope, upper_lower_limits, EnvelopeSample, EnvelopeVerdict, LimitEnvelopePair,
};
use subadd_core::funcdsl::{certify_structure, GalleryEntry};
use subadd_core::num::{self, Rational};
use subadd_core::theorems::{
    counterexample_demo, half_line_samples, run_checks, CheckContext, CheckId, Verdict, VerdictStatus,
};
use subadd_core::{Basis, Interval, RealElement};

use crate::config::{AnalysisConfig, ConfigError, ResolvedFunction};
use crate::report::{Outcome, Report, Section, Trace};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] subadd_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Failed preconditions of an analysis are inconclusive (2), the rest
    /// are usage or configuration errors (3).
    pub fn exit_code(&self) -> i32 {
        use subadd_core::Error as E;
        match self {
            CliError::Core(E::Precondition(_) | E::Diagnostic(_)) => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Beta,
    Gamma,
    Envelope,
}

/// Resolved configuration plus the function under study.
pub struct Session {
    pub cfg: AnalysisConfig,
    pub basis: Arc<Basis>,
    pub function: Option<ResolvedFunction>,
}

impl Session {
    pub fn new(cfg: AnalysisConfig, function: Option<ResolvedFunction>) -> CliResult<Session> {
        let basis = match (&function, cfg.basis_text.trim().is_empty()) {
            (Some(ResolvedFunction { basis: Some(b), .. }), true) => b.clone(),
            (Some(ResolvedFunction { basis: Some(_), .. }), false) => {
                return Err(CliError::Usage(
                    "the function file and the config both declare a basis".into(),
                ))
            }
            _ => cfg.basis()?,
        };
        Ok(Session { cfg, basis, function })
    }

    fn function(&self) -> CliResult<&ResolvedFunction> {
        self.function
            .as_ref()
            .ok_or_else(|| CliError::Usage("no function given (argument or [function] section)".into()))
    }

    fn subgroup(&self) -> CliResult<Option<DenseSubgroup>> {
        Ok(self.cfg.subgroup(&self.basis)?)
    }

    fn sigma(&self) -> CliResult<Option<SigmaSet>> {
        Ok(self.cfg.sigma(&self.basis)?)
    }

    fn element(&self, text: &str) -> CliResult<RealElement> {
        RealElement::parse(&self.basis, text).map_err(|e| CliError::Usage(format!("point `{}`: {}", text, e)))
    }

    /// The config echo: everything that determines the output bytes.
    fn echo(&self, command: &str, extra: Value) -> Value {
        let mut v = json!({
            "command": command,
            "basis": self.basis.declaration_text(),
            "schedules": self.cfg.schedules,
        });
        if let Some(f) = &self.function {
            v["function"] = json!({"name": f.label, "expr": f.expr.to_string()});
        }
        if let Some(s) = &self.cfg.subgroup {
            v["subgroup"] = json!(s);
        }
        if let Some(s) = &self.cfg.sigma {
            v["sigma"] = json!(s);
        }
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        v
    }

    fn report(&self, command: &str, extra: Value) -> Report {
        let mut r = Report::new(self.echo(command, extra));
        if self.cfg.timestamp {
            r.timestamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs());
        }
        r
    }

    fn check_context(&self) -> CliResult<CheckContext> {
        let mut ctx = CheckContext::new(&self.basis);
        ctx.subgroup = self.subgroup()?;
        ctx.sigma = self.sigma()?;
        ctx.params = self.cfg.schedules.checks.clone();
        Ok(ctx)
    }
}

fn decimal(x: &RealElement) -> String {
    num::to_decimal(&x.enclose(64).midpoint(), 12)
}

fn point_rows(trace: &[(RealElement, Interval)]) -> Vec<Vec<String>> {
    trace
        .iter()
        .map(|(x, v)| vec![x.to_string(), decimal(x), num::to_pq(v.lo()), num::to_pq(v.hi())])
        .collect()
}

fn point_trace(name: &str, value: &str, trace: &[(RealElement, Interval)]) -> Trace {
    Trace {
        name: name.to_string(),
        columns: vec!["x".into(), "x_approx".into(), format!("{}_lo", value), format!("{}_hi", value)],
        rows: point_rows(trace),
    }
}

fn gamma_trace(name: &str, g: &GammaEstimate) -> Trace {
    point_trace(name, "ratio", &g.trace)
}

fn partials_trace(s: &EnvelopeSample) -> Trace {
    Trace {
        name: "star partials".into(),
        columns: vec!["n".into(), "n_s_lo".into(), "n_s_hi".into()],
        rows: s
            .partials
            .iter()
            .map(|(n, v)| vec![n.to_string(), num::to_pq(v.lo()), num::to_pq(v.hi())])
            .collect(),
    }
}

fn limit_trace(p: &LimitEnvelopePair) -> Trace {
    let cell = |v: &Option<Interval>, hi: bool| match v {
        Some(v) => num::to_pq(if hi { v.hi() } else { v.lo() }),
        None => String::new(),
    };
    Trace {
        name: "delta sup inf".into(),
        columns: ["delta", "height", "points", "sup_lo", "sup_hi", "inf_lo", "inf_hi"]
            .map(String::from)
            .to_vec(),
        rows: p
            .steps
            .iter()
            .map(|s| {
                vec![
                    num::to_pq(&s.delta),
                    s.height.to_string(),
                    s.points.to_string(),
                    cell(&s.sup, false),
                    cell(&s.sup, true),
                    cell(&s.inf, false),
                    cell(&s.inf, true),
                ]
            })
            .collect(),
    }
}

fn violation_outcome(r: &ViolationReport) -> Outcome {
    match r.status {
        CheckStatus::NoViolation => Outcome::Ok,
        CheckStatus::Suspect => Outcome::Inconclusive,
        CheckStatus::Violation => Outcome::Violation,
    }
}

fn subadditivity_section(s: &Session, f: &ResolvedFunction) -> CliResult<Section> {
    let p = &s.cfg.schedules.checks;
    let spec = GridSpec::symmetric(&s.basis, p.grid_radius.clone(), p.grid_height).map_err(subadd_core::Error::from)?;
    let grid = DenseSubgroup::full_span(&s.basis, true)
        .enumerate(&spec)
        .map_err(subadd_core::Error::from)?;
    let tol = p.tol.clone();
    let r = check_subadditive(&f.expr, &grid, tol.as_ref())?;
    let cert = certify_structure(&f.expr);
    let summary = vec![
        format!("structural certificate: {}", cert.level),
        format!(
            "subadditivity on {} grid points: {} pairs, {} violations, {} suspect",
            grid.len(),
            r.pairs_checked,
            r.violations,
            r.suspects
        ),
    ];
    Ok(Section::new(
        "subadditivity",
        "violation-report",
        violation_outcome(&r),
        summary,
        json!({"certificate": cert, "report": r, "grid_points": grid.len()}),
    ))
}

fn asymptotic_outcome(r: &AsymptoticReport) -> Outcome {
    match r.chain.holds {
        Some(false) => Outcome::Violation,
        _ if r.beta.tail_bound_holds => Outcome::Ok,
        _ => Outcome::Inconclusive,
    }
}

pub fn analyze_cmd(s: &Session) -> CliResult<Report> {
    let f = s.function()?;
    let sigma = s.sigma()?;
    let mut report = s.report("analyze", json!({}));
    report.sections.push(subadditivity_section(s, f)?);
    let r = analyze(&f.expr, &s.basis, sigma.as_ref(), &s.cfg.schedules.checks.asymptotic)?;
    let mut section = Section::new("asymptotics", "asymptotic-report", asymptotic_outcome(&r), r.summary_lines(), &r)
        .with_trace(point_trace("beta", "ratio", &r.beta.trace))
        .with_trace(gamma_trace("gamma plus", &r.gamma_plus))
        .with_trace(gamma_trace("gamma minus", &r.gamma_minus));
    if let Some(g) = &r.gamma_sigma {
        section = section.with_trace(gamma_trace("gamma sigma", g));
    }
    report.sections.push(section);
    Ok(report)
}

fn verdict_outcome(v: &Verdict) -> Outcome {
    match v.status {
        VerdictStatus::VerifiedAtScale => Outcome::Ok,
        VerdictStatus::Falsified => Outcome::Violation,
        VerdictStatus::Inconclusive | VerdictStatus::HypothesesNotMet => Outcome::Inconclusive,
    }
}

fn word(h: Holds) -> &'static str {
    match h {
        Holds::Holds => "holds",
        Holds::Fails => "fails",
        Holds::Inconclusive => "inconclusive",
    }
}

fn verdict_lines(v: &Verdict) -> Vec<String> {
    let mut out = vec![v.summary()];
    for (kind, probes) in [("hypothesis", &v.hypothesis_results), ("conclusion", &v.conclusion_results)] {
        for p in probes {
            out.push(format!("  {} {}: {} ({})", kind, p.name, word(p.outcome), p.detail));
        }
    }
    out.extend(v.notes.iter().map(|n| format!("  note: {}", n)));
    out
}

/// `ids` empty means every check whose context is available.
pub fn check_cmd(s: &Session, ids: &[CheckId]) -> CliResult<Report> {
    let f = s.function()?;
    let ctx = s.check_context()?;
    let ids: Vec<CheckId> = if ids.is_empty() {
        CheckId::ALL
            .into_iter()
            .filter(|id| (!id.needs_subgroup() || ctx.subgroup.is_some()) && (!id.needs_sigma() || ctx.sigma.is_some()))
            .collect()
    } else {
        ids.to_vec()
    };
    let names: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    let mut report = s.report("check", json!({"checks": names}));
    for v in run_checks(&ids, &f.expr, &ctx)? {
        report.sections.push(Section::new(
            &format!("check {}", v.check_id),
            "verdict",
            verdict_outcome(&v),
            verdict_lines(&v),
            &v,
        ));
    }
    Ok(report)
}

fn star_section(s: &Session, f: &ResolvedFunction, x: &RealElement) -> CliResult<Section> {
    let sample = star_envelope(&f.expr, x, s.cfg.schedules.checks.star_n_max, None)?;
    let (outcome, line) = match &sample.verdict {
        EnvelopeVerdict::Converged { value } => (Outcome::Ok, format!("S*({}) = {}", x, describe(value))),
        EnvelopeVerdict::DivergingPlusInfinity => (
            Outcome::Ok,
            format!("S*({}) = +inf (partial sup {} at n = {})", x, describe(&sample.partial_sup()), sample.n_max),
        ),
        EnvelopeVerdict::Undetermined => (
            Outcome::Inconclusive,
            format!("S*({}) undetermined (partial sup {})", x, describe(&sample.partial_sup())),
        ),
    };
    Ok(Section::new("star envelope", "envelope-sample", outcome, vec![line], &sample).with_trace(partials_trace(&sample)))
}

fn limits_section(s: &Session, f: &ResolvedFunction, a: &DenseSubgroup, x: &RealElement) -> CliResult<Section> {
    let pair = upper_lower_limits(&f.expr, a, x, &s.cfg.schedules.envelope)?;
    let summary = vec![
        format!("S_A^+({}) = {}", x, describe(&pair.upper)),
        format!("S_A^-({}) = {}", x, describe(&pair.lower)),
        format!("x in A: {}, snapped: {}, monotone: {}", pair.in_subgroup, pair.snapped, pair.monotone),
        format!("note: {}", pair.note),
    ];
    let outcome = if pair.monotone { Outcome::Ok } else { Outcome::Inconclusive };
    Ok(Section::new("limit envelopes", "limit-envelope-pair", outcome, summary, &pair).with_trace(limit_trace(&pair)))
}

pub fn envelope_cmd(s: &Session, at: &str) -> CliResult<Report> {
    let f = s.function()?;
    let x = s.element(at)?;
    let mut report = s.report("envelope", json!({"at": x.to_string()}));
    report.sections.push(star_section(s, f, &x)?);
    if let Some(a) = s.subgroup()? {
        report.sections.push(limits_section(s, f, &a, &x)?);
    }
    Ok(report)
}

fn holds_outcome(h: Holds) -> Outcome {
    match h {
        Holds::Holds => Outcome::Ok,
        Holds::Fails => Outcome::Violation,
        Holds::Inconclusive => Outcome::Inconclusive,
    }
}

pub fn extend_cmd(s: &Session) -> CliResult<Report> {
    let f = s.function()?;
    let a = s
        .subgroup()?
        .ok_or_else(|| CliError::Usage("extend needs a subgroup (--subgroup or [subgroup])".into()))?;
    let ext = extend_from_subgroup(&f.expr, &a, s.cfg.schedules.envelope.clone())?;
    let mut pts = half_line_samples(&s.basis, &num::int(2), 8);
    pts.extend(pts.clone().iter().map(RealElement::neg));
    let audit = ext.linearity_audit(&pts)?;
    let c = ext.checks();
    let slope = |v: &Option<Interval>| v.as_ref().map(describe).unwrap_or_else(|| "not constant".into());
    let summary = vec![
        format!("A = {}", a),
        format!("homogeneous on A: {}, additive on A: {}", word(c.homogeneous), word(c.additive)),
        format!("S_A^+(t)/t on t > 0: {}", slope(&audit.plus_slope)),
        format!("S_A^-(t)/t on t < 0: {}", slope(&audit.minus_slope)),
        format!("S_A^+ = S_A^- on samples: {}", audit.upper_equals_lower),
    ];
    let outcome = holds_outcome(c.homogeneous).max(if audit.plus_constant && audit.minus_constant {
        Outcome::Ok
    } else {
        Outcome::Inconclusive
    });
    let rows = audit
        .ratios
        .iter()
        .map(|(x, u, l)| {
            vec![x.to_string(), decimal(x), num::to_pq(u.lo()), num::to_pq(u.hi()), num::to_pq(l.lo()), num::to_pq(l.hi())]
        })
        .collect();
    let trace = Trace {
        name: "limit ratios".into(),
        columns: ["x", "x_approx", "upper_lo", "upper_hi", "lower_lo", "lower_hi"].map(String::from).to_vec(),
        rows,
    };
    let mut report = s.report("extend", json!({}));
    report.sections.push(
        Section::new("extension", "extension", outcome, summary, json!({"extension": &ext, "audit": audit}))
            .with_trace(trace),
    );
    Ok(report)
}

pub fn gallery_cmd(s: &Session, name: Option<&str>) -> CliResult<Report> {
    let entries = match name {
        Some(n) => vec![GalleryEntry::parse(n).map_err(CliError::Usage)?],
        None => GalleryEntry::catalogue(),
    };
    let mut report = s.report("gallery", json!({"name": name}));
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for e in &entries {
        let expr = e.expr();
        let cert = certify_structure(&expr);
        lines.push(format!("{}: {} [{}]", e, expr, cert.level));
        rows.push(json!({"name": e.to_string(), "expr": expr.to_string(), "certificate": cert}));
    }
    report.sections.push(Section::new("gallery", "gallery", Outcome::Ok, lines, rows));
    Ok(report)
}

pub fn demo_cmd(s: &Session) -> CliResult<Report> {
    let d = counterexample_demo()?;
    let w = &d.homogeneity_witness;
    let reproduced = d.subadditivity.violations == 0
        && d.rational_homogeneity.status == CheckStatus::NoViolation
        && w.lhs.enclose(64).exact() == Some(&num::int(1))
        && w.rhs.enclose(64).exact() == Some(&num::int(2))
        && d.star_at_sqrt2.verdict == EnvelopeVerdict::DivergingPlusInfinity
        && d.star_at_half.value().and_then(Interval::exact) == Some(&Rational::default());
    let outcome = if reproduced { Outcome::Ok } else { Outcome::Violation };
    let mut report = s.report("demo-counterexample", json!({}));
    report.sections.push(
        Section::new("counterexample", "demo", outcome, d.summary_lines(), &d)
            .with_trace(Trace {
                name: "star partials at sqrt2".into(),
                ..partials_trace(&d.star_at_sqrt2)
            })
            .with_trace(Trace {
                name: "star partials at 1/2".into(),
                ..partials_trace(&d.star_at_half)
            }),
    );
    Ok(report)
}

pub fn trace_cmd(s: &Session, q: Quantity, at: Option<&str>) -> CliResult<Report> {
    let f = s.function()?;
    let params = &s.cfg.schedules.checks.asymptotic;
    let one = RealElement::integer(&s.basis, 1);
    let mut report = s.report(
        "trace",
        json!({"quantity": format!("{:?}", q).to_lowercase(), "at": at}),
    );
    let section = match q {
        Quantity::Beta => {
            let b = subadd_core::asymptotics::estimate_beta(&f.expr, &one, params)?;
            Section::new("beta trace", "trace", Outcome::Ok, vec![format!("beta = {}", describe(&b.beta_hat))], json!({}))
                .with_trace(point_trace("beta", "ratio", &b.trace))
        }
        Quantity::Gamma => {
            use subadd_core::asymptotics::{gamma_zero, Side};
            let gp = gamma_zero(&f.expr, &s.basis, Side::Plus, params)?;
            let gm = gamma_zero(&f.expr, &s.basis, Side::Minus, params)?;
            let lines = vec![format!("gamma+ = {}", gp.value), format!("gamma- = {}", gm.value)];
            Section::new("gamma trace", "trace", Outcome::Ok, lines, json!({}))
                .with_trace(gamma_trace("gamma plus", &gp))
                .with_trace(gamma_trace("gamma minus", &gm))
        }
        Quantity::Envelope => {
            let x = s.element(at.unwrap_or("1"))?;
            let mut sec = star_section(s, f, &x)?;
            sec.body = json!({});
            sec
        }
    };
    report.sections.push(section);
    Ok(report)
}
