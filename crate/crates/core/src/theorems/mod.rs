//! Executable checks: each probes a theorem's hypotheses on finite samples,
//! tests its conclusions, and reports a three-valued verdict.

mod checks;
mod demo;
mod probes;

pub use demo::{counterexample_demo, DemoReport};
pub use probes::{default_zero_sequence, half_line_samples, Evidence, ProbeResult};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::asymptotics::{AsymptoticParams, Holds};
use crate::domains::{DenseSubgroup, SigmaSet};
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Basis, RealElement};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    T0,
    T1,
    T2,
    Thp,
    T0Plus,
    Cor,
    Prop1,
    Prop2,
    T4,
    T5,
    BmLite,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::T0,
        CheckId::T1,
        CheckId::T2,
        CheckId::Thp,
        CheckId::T0Plus,
        CheckId::Cor,
        CheckId::Prop1,
        CheckId::Prop2,
        CheckId::T4,
        CheckId::T5,
        CheckId::BmLite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::T0 => "T0",
            CheckId::T1 => "T1",
            CheckId::T2 => "T2",
            CheckId::Thp => "THP",
            CheckId::T0Plus => "T0PLUS",
            CheckId::Cor => "COR",
            CheckId::Prop1 => "PROP1",
            CheckId::Prop2 => "PROP2",
            CheckId::T4 => "T4",
            CheckId::T5 => "T5",
            CheckId::BmLite => "BM_LITE",
        }
    }

    pub fn needs_subgroup(self) -> bool {
        matches!(self, CheckId::T2 | CheckId::T5)
    }

    pub fn needs_sigma(self) -> bool {
        matches!(self, CheckId::T0Plus | CheckId::Cor | CheckId::T4 | CheckId::T5)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<CheckId> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = CheckId::ALL.iter().map(|c| c.as_str()).collect();
                Error::Config(format!("unknown check `{}` (one of {})", s, names.join(", ")))
            })
    }
}

impl Serialize for CheckId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    VerifiedAtScale,
    Inconclusive,
    HypothesesNotMet,
    Falsified,
}

impl VerdictStatus {
    /// 0 verified, 1 falsified, 2 inconclusive or hypotheses not met.
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictStatus::VerifiedAtScale => 0,
            VerdictStatus::Falsified => 1,
            VerdictStatus::Inconclusive | VerdictStatus::HypothesesNotMet => 2,
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::VerifiedAtScale => "verified-at-scale",
            VerdictStatus::Inconclusive => "inconclusive",
            VerdictStatus::HypothesesNotMet => "hypotheses-not-met",
            VerdictStatus::Falsified => "falsified",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckParams {
    /// `None`: 1e-9 for exact pipelines, 1e-6 otherwise.
    #[serde(serialize_with = "ser_opt")]
    pub tol: Option<Rational>,
    #[serde(serialize_with = "num::ser_rational")]
    pub grid_radius: Rational,
    pub grid_height: u64,
    pub grid_max_points: usize,
    pub homogeneity_n: u64,
    /// Half-line samples `t_span * i / t_samples`.
    pub t_samples: usize,
    #[serde(serialize_with = "num::ser_rational")]
    pub t_span: Rational,
    pub star_n_max: u64,
    #[serde(serialize_with = "num::ser_rational")]
    pub continuity_tol: Rational,
    #[serde(serialize_with = "num::ser_rational")]
    pub zero_tol: Rational,
    pub asymptotic: AsymptoticParams,
}

fn ser_opt<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => num::ser_rational(q, s),
        None => s.serialize_str("default"),
    }
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            tol: None,
            grid_radius: num::int(2),
            grid_height: 3,
            grid_max_points: 120,
            homogeneity_n: 10,
            t_samples: 32,
            t_span: num::int(100),
            star_n_max: 1000,
            continuity_tol: num::ratio(1, 1000),
            zero_tol: num::ratio(1, 100),
            asymptotic: AsymptoticParams::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckContext {
    pub basis: Arc<Basis>,
    pub subgroup: Option<DenseSubgroup>,
    pub sigma: Option<SigmaSet>,
    /// Ascending negative sequence for the `z_n -> 0` criteria.
    pub zero_sequence: Option<Vec<RealElement>>,
    /// The constant `c` of the linear bound on `Σ`; defaults to `γ^Σ + ε`.
    pub c_bound: Option<Rational>,
    pub params: CheckParams,
}

impl CheckContext {
    pub fn new(basis: &Arc<Basis>) -> Self {
        CheckContext {
            basis: basis.clone(),
            subgroup: None,
            sigma: None,
            zero_sequence: None,
            c_bound: None,
            params: CheckParams::default(),
        }
    }

    pub fn with_subgroup(mut self, a: DenseSubgroup) -> Self {
        self.subgroup = Some(a);
        self
    }

    pub fn with_sigma(mut self, s: SigmaSet) -> Self {
        self.sigma = Some(s);
        self
    }

    pub fn tol_for(&self, f: &FunctionExpr) -> Rational {
        self.params.tol.clone().unwrap_or_else(|| {
            if f.is_exact_pipeline() {
                num::ratio(1, 1_000_000_000)
            } else {
                num::ratio(1, 1_000_000)
            }
        })
    }

    fn subgroup_for(&self, id: CheckId) -> Result<&DenseSubgroup> {
        self.subgroup
            .as_ref()
            .ok_or_else(|| Error::MissingContext(format!("{} needs a subgroup A", id)))
    }

    fn sigma_for(&self, id: CheckId) -> Result<&SigmaSet> {
        self.sigma
            .as_ref()
            .ok_or_else(|| Error::MissingContext(format!("{} needs a sigma set", id)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictParameters {
    #[serde(serialize_with = "num::ser_rational")]
    pub tol: Rational,
    pub checks: CheckParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_sequence_len: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check_id: CheckId,
    pub function: String,
    pub hypothesis_results: Vec<ProbeResult>,
    pub conclusion_results: Vec<ProbeResult>,
    /// Conclusions were run although some hypothesis did not hold.
    pub conclusions_informational: bool,
    pub status: VerdictStatus,
    pub witnesses: Vec<Evidence>,
    pub parameters: VerdictParameters,
    #[serde(serialize_with = "ser_opt_c", skip_serializing_if = "Option::is_none")]
    pub c_bound: Option<Rational>,
    pub notes: Vec<String>,
}

fn ser_opt_c<S: Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => num::ser_rational(q, s),
        None => s.serialize_none(),
    }
}

impl Verdict {
    pub fn hypotheses(&self) -> Holds {
        probes::combine(self.hypothesis_results.iter().map(|p| p.outcome))
    }

    pub fn conclusions(&self) -> Holds {
        probes::combine(self.conclusion_results.iter().map(|p| p.outcome))
    }

    pub fn hypothesis(&self, name: &str) -> Option<&ProbeResult> {
        self.hypothesis_results.iter().find(|p| p.name == name)
    }

    pub fn conclusion(&self, name: &str) -> Option<&ProbeResult> {
        self.conclusion_results.iter().find(|p| p.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}", self.check_id, self.status);
        if self.conclusions_informational {
            s.push_str(&format!(" (conclusions, informational: {:?})", self.conclusions()).to_lowercase());
        }
        s
    }
}

/// Outcome of a check body before the status is settled.
pub(crate) struct Findings {
    pub hypotheses: Vec<probes::Probe>,
    pub conclusions: Vec<probes::Probe>,
    pub c_bound: Option<Rational>,
    pub notes: Vec<String>,
}

fn settle(id: CheckId, f: &FunctionExpr, ctx: &CheckContext, tol: Rational, found: Findings) -> Verdict {
    let mut witnesses = Vec::new();
    let mut hyps = Vec::new();
    for (p, ev) in found.hypotheses {
        hyps.push(p);
        witnesses.extend(ev);
    }
    let mut concl = Vec::new();
    for (p, ev) in found.conclusions {
        concl.push(p);
        witnesses.extend(ev);
    }
    let h = probes::combine(hyps.iter().map(|p| p.outcome));
    let c = probes::combine(concl.iter().map(|p| p.outcome));
    let status = match (h, c) {
        (Holds::Fails, _) => VerdictStatus::HypothesesNotMet,
        (Holds::Inconclusive, _) => VerdictStatus::Inconclusive,
        (Holds::Holds, Holds::Fails) => VerdictStatus::Falsified,
        (Holds::Holds, Holds::Inconclusive) => VerdictStatus::Inconclusive,
        (Holds::Holds, Holds::Holds) => VerdictStatus::VerifiedAtScale,
    };
    Verdict {
        check_id: id,
        function: f.to_string(),
        hypothesis_results: hyps,
        conclusion_results: concl,
        conclusions_informational: h != Holds::Holds,
        status,
        witnesses,
        parameters: VerdictParameters {
            tol,
            checks: ctx.params.clone(),
            subgroup: ctx.subgroup.as_ref().filter(|_| id.needs_subgroup()).map(|a| a.to_string()),
            sigma: ctx.sigma.clone().filter(|_| id.needs_sigma()),
            zero_sequence_len: ctx.zero_sequence.as_ref().map(Vec::len),
        },
        c_bound: found.c_bound,
        notes: found.notes,
    }
}

pub fn run_check(id: CheckId, f: &FunctionExpr, ctx: &CheckContext) -> Result<Verdict> {
    ctx.params.asymptotic.validate()?;
    if id.needs_subgroup() {
        ctx.subgroup_for(id)?;
    }
    if id.needs_sigma() {
        ctx.sigma_for(id)?;
    }
    let tol = ctx.tol_for(f);
    let found = checks::run(id, f, ctx, &tol)?;
    Ok(settle(id, f, ctx, tol, found))
}

/// Runs several checks concurrently; verdicts come back in input order.
pub fn run_checks(ids: &[CheckId], f: &FunctionExpr, ctx: &CheckContext) -> Result<Vec<Verdict>> {
    ids.par_iter().map(|id| run_check(*id, f, ctx)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_ids_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
        }
        assert_eq!("bm_lite".parse::<CheckId>().unwrap(), CheckId::BmLite);
        assert!("T3".parse::<CheckId>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(VerdictStatus::VerifiedAtScale.exit_code(), 0);
        assert_eq!(VerdictStatus::Falsified.exit_code(), 1);
        assert_eq!(VerdictStatus::HypothesesNotMet.exit_code(), 2);
    }
}
