//! The indicator of the irrationals: subadditive, ℕ-homogeneous on ℚ and
//! zero there, yet not linear; `S*` is `+∞` at every irrational point.

use serde::Serialize;

use super::{run_check, CheckContext, CheckId, Verdict};
use crate::checkers::{check_homogeneity, check_subadditive, value_at, ViolationReport, Witness};
use crate::domains::{DenseSubgroup, GridSpec, SigmaSet};
use crate::envelopes::{star_envelope, EnvelopeSample, EnvelopeVerdict};
use crate::funcdsl::gallery;
use crate::num;
use crate::qspan::{Basis, RealElement};
use crate::Result;

pub const DEMO_FUNCTION: &str = "IRR_INDICATOR";
const GRID_HEIGHT: u64 = 12;
const STAR_N_MAX: u64 = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub function: String,
    /// Integer combinations of `1` and `sqrt2`, so sums of irrationals can
    /// be rational.
    pub grid: String,
    pub grid_points: usize,
    pub subadditivity: ViolationReport,
    /// Homogeneity on the rational grid.
    pub rational_homogeneity: ViolationReport,
    /// `S(2 sqrt2) = 1` against `2 S(sqrt2) = 2`.
    pub homogeneity_witness: Witness,
    pub star_at_sqrt2: EnvelopeSample,
    pub star_at_half: EnvelopeSample,
    pub t5: Verdict,
}

impl DemoReport {
    pub fn summary_lines(&self) -> Vec<String> {
        let w = &self.homogeneity_witness;
        vec![
            format!(
                "subadditivity on {} ({} points): {} pairs, {} violations, {} suspect",
                self.grid,
                self.grid_points,
                self.subadditivity.pairs_checked,
                self.subadditivity.violations,
                self.subadditivity.suspects
            ),
            format!(
                "homogeneity on Q, n <= 10: {} checks, {} violations",
                self.rational_homogeneity.pairs_checked, self.rational_homogeneity.violations
            ),
            format!(
                "homogeneity at sqrt2, n = 2: S(2 sqrt2) = {} but 2 S(sqrt2) = {}",
                w.lhs.enclose(64), w.rhs.enclose(64)
            ),
            format!("S*(sqrt2) over n <= {}: {}", self.star_at_sqrt2.n_max, verdict(&self.star_at_sqrt2)),
            format!("S*(1/2) over n <= {}: {}", self.star_at_half.n_max, verdict(&self.star_at_half)),
            format!("T5 with A = Q: {}", self.t5.status),
        ]
    }
}

fn verdict(s: &EnvelopeSample) -> String {
    match s.value() {
        Some(v) => format!("converged to {}", v),
        None if s.verdict == EnvelopeVerdict::DivergingPlusInfinity => {
            format!("diverging to +inf, partial sup {}", s.partial_sup())
        }
        None => format!("undetermined, partial sup {}", s.partial_sup()),
    }
}

pub fn counterexample_demo() -> Result<DemoReport> {
    let basis = Basis::sqrt2();
    let f = gallery(DEMO_FUNCTION).map_err(crate::Error::Unsupported)?;
    let spec = GridSpec::symmetric(&basis, num::int(2), GRID_HEIGHT)?;
    let grid_text = "<1, sqrt2>";
    let grid = DenseSubgroup::parse(&basis, grid_text)?.enumerate(&spec)?;
    let subadditivity = check_subadditive(&f, &grid, None)?;
    let rationals = DenseSubgroup::rationals(&basis).enumerate(&spec)?;
    let rational_homogeneity = check_homogeneity(&f, &rationals, 10, None)?;

    let r2 = RealElement::parse(&basis, "sqrt2")?;
    let lhs = value_at(&f, &r2.scale(&num::int(2)))?;
    let rhs = value_at(&f, &r2)?.scale(&num::int(2));
    let outcome = crate::checkers::compare_eq(&lhs, &rhs, None)?;
    let homogeneity_witness = Witness {
        x: r2.clone(),
        y: None,
        n: Some(2),
        lhs,
        rhs,
        outcome,
    };

    let star_at_sqrt2 = star_envelope(&f, &r2, STAR_N_MAX, None)?;
    let star_at_half = star_envelope(&f, &RealElement::rational(&basis, num::ratio(1, 2)), STAR_N_MAX, None)?;
    let ctx = CheckContext::new(&basis)
        .with_subgroup(DenseSubgroup::rationals(&basis))
        .with_sigma(SigmaSet::dyadic(&basis));
    let t5 = run_check(CheckId::T5, &f, &ctx)?;
    Ok(DemoReport {
        function: DEMO_FUNCTION.to_string(),
        grid: grid_text.to_string(),
        grid_points: grid.len(),
        subadditivity,
        rational_homogeneity,
        homogeneity_witness,
        star_at_sqrt2,
        star_at_half,
        t5,
    })
}
