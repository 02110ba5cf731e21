use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{compare_eq, compare_le, value_at, Tri};
use crate::funcdsl::{FunctionExpr, Value};
use crate::num::{self, Rational};
use crate::qspan::RealElement;
use crate::Result;

const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    NoViolation,
    Violation,
    Suspect,
}

/// `lhs` should not exceed (subadditivity) or should equal (homogeneity) `rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub x: RealElement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<RealElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub lhs: Value,
    pub rhs: Value,
    pub outcome: Tri,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub status: CheckStatus,
    /// Certain violations first, then suspects; each in grid order.
    pub witnesses: Vec<Witness>,
    pub pairs_checked: usize,
    pub violations: usize,
    pub suspects: usize,
    #[serde(serialize_with = "ser_opt_rational")]
    pub tol: Option<Rational>,
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => num::ser_rational(q, s),
        None => s.serialize_str("default"),
    }
}

impl ViolationReport {
    fn assemble(rows: Vec<Row>, tol: Option<&Rational>) -> ViolationReport {
        let mut report = ViolationReport {
            status: CheckStatus::NoViolation,
            witnesses: Vec::new(),
            pairs_checked: 0,
            violations: 0,
            suspects: 0,
            tol: tol.cloned(),
        };
        let mut suspects = Vec::new();
        for row in rows {
            report.pairs_checked += row.checked;
            report.violations += row.violations;
            report.suspects += row.suspects;
            for w in row.witnesses {
                match w.outcome {
                    Tri::Violation if report.witnesses.len() < MAX_WITNESSES => {
                        report.witnesses.push(w)
                    }
                    Tri::Suspect if suspects.len() < MAX_WITNESSES => suspects.push(w),
                    _ => {}
                }
            }
        }
        report.status = if report.violations > 0 {
            CheckStatus::Violation
        } else if report.suspects > 0 {
            CheckStatus::Suspect
        } else {
            CheckStatus::NoViolation
        };
        let room = MAX_WITNESSES.saturating_sub(report.witnesses.len());
        report.witnesses.extend(suspects.into_iter().take(room));
        report
    }

    pub fn first_violation(&self) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.outcome == Tri::Violation)
    }
}

#[derive(Default)]
struct Row {
    checked: usize,
    violations: usize,
    suspects: usize,
    witnesses: Vec<Witness>,
}

impl Row {
    fn record(&mut self, w: Witness) {
        self.checked += 1;
        match w.outcome {
            Tri::Pass => return,
            Tri::Violation => self.violations += 1,
            Tri::Suspect => self.suspects += 1,
        }
        if self.witnesses.len() < 2 * MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }
}

/// `S(x + y) <= S(x) + S(y) + tol` over all ordered pairs of the grid.
/// `tol = None` means 0 for exact values and twice the enclosure width otherwise.
pub fn check_subadditive(
    f: &FunctionExpr,
    grid: &[RealElement],
    tol: Option<&Rational>,
) -> Result<ViolationReport> {
    check_pairs(f, grid, tol, compare_le)
}

/// `S(x + y) = S(x) + S(y)` within `tol` over all ordered pairs of the grid.
pub fn check_additive(
    f: &FunctionExpr,
    grid: &[RealElement],
    tol: Option<&Rational>,
) -> Result<ViolationReport> {
    check_pairs(f, grid, tol, compare_eq)
}

fn check_pairs(
    f: &FunctionExpr,
    grid: &[RealElement],
    tol: Option<&Rational>,
    cmp: fn(&Value, &Value, Option<&Rational>) -> Result<Tri>,
) -> Result<ViolationReport> {
    let values: Vec<Value> = grid
        .par_iter()
        .map(|x| value_at(f, x))
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<Row> {
            let mut row = Row::default();
            for j in 0..grid.len() {
                let s = grid[i].add(&grid[j])?;
                let lhs = value_at(f, &s)?;
                let rhs = values[i].add(&values[j])?;
                let outcome = cmp(&lhs, &rhs, tol)?;
                row.record(Witness {
                    x: grid[i].clone(),
                    y: Some(grid[j].clone()),
                    n: None,
                    lhs,
                    rhs,
                    outcome,
                });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(ViolationReport::assemble(rows, tol))
}

/// `S(n x) = n S(x)` for `n = 0..=n_max` at each point.
pub fn check_homogeneity(
    f: &FunctionExpr,
    points: &[RealElement],
    n_max: u64,
    tol: Option<&Rational>,
) -> Result<ViolationReport> {
    let rows: Vec<Row> = points
        .par_iter()
        .map(|x| -> Result<Row> {
            let mut row = Row::default();
            let sx = value_at(f, x)?;
            for n in 0..=n_max {
                let q = num::int(n as i64);
                let lhs = if q.is_zero() {
                    value_at(f, &RealElement::zero(x.basis()))?
                } else {
                    value_at(f, &x.scale(&q))?
                };
                let rhs = sx.scale(&q);
                let outcome = compare_eq(&lhs, &rhs, tol)?;
                row.record(Witness {
                    x: x.clone(),
                    y: None,
                    n: Some(n),
                    lhs,
                    rhs,
                    outcome,
                });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(ViolationReport::assemble(rows, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DenseSubgroup, GridSpec};
    use crate::funcdsl::{gallery, parse};
    use crate::qspan::Basis;

    fn el(b: &std::sync::Arc<crate::Basis>, s: &str) -> RealElement {
        RealElement::parse(b, s).unwrap()
    }

    #[test]
    fn subadditivity_examples() {
        let b = Basis::sqrt2();
        let grid: Vec<RealElement> = ["-1", "0", "1"].iter().map(|s| el(&b, s)).collect();
        let abs = check_subadditive(&gallery("ABS").unwrap(), &grid, None).unwrap();
        assert_eq!(abs.status, CheckStatus::NoViolation);
        assert_eq!(abs.pairs_checked, 9);

        let neg_abs = parse("min(t, -1*t)").unwrap();
        let r = check_subadditive(&neg_abs, &grid, None).unwrap();
        assert_eq!(r.status, CheckStatus::Violation);
        // brute force: the only violating pairs are (1, -1) and (-1, 1)
        assert_eq!(r.violations, 2);
        let w = r.first_violation().unwrap();
        assert_eq!(w.x, el(&b, "-1"));
        assert_eq!(w.y, Some(el(&b, "1")));
        assert_eq!(w.lhs, Value::Exact(el(&b, "0")));
        assert_eq!(w.rhs, Value::Exact(el(&b, "-2")));
    }

    #[test]
    fn additivity_examples() {
        let b = Basis::sqrt2();
        let grid: Vec<RealElement> = ["-1", "1/2", "sqrt2"].iter().map(|s| el(&b, s)).collect();
        let lin = check_additive(&gallery("LINEAR(3/7)").unwrap(), &grid, None).unwrap();
        assert_eq!(lin.status, CheckStatus::NoViolation);
        let r = check_additive(&gallery("ABS").unwrap(), &grid, None).unwrap();
        // |x + y| < |x| + |y| exactly when the signs differ: 2 * 2 ordered pairs
        assert_eq!(r.violations, 4);
    }

    #[test]
    fn indicator_is_subadditive_on_height_12_grid() {
        let b = Basis::sqrt2();
        let g = DenseSubgroup::parse(&b, "<1, sqrt2>").unwrap();
        let grid = g
            .enumerate(&GridSpec::symmetric(&b, num::int(2), 12).unwrap())
            .unwrap();
        let r = check_subadditive(&gallery("IRR_INDICATOR").unwrap(), &grid, None).unwrap();
        assert_eq!(r.status, CheckStatus::NoViolation);
        assert_eq!(r.pairs_checked, grid.len() * grid.len());
    }

    #[test]
    fn homogeneity_examples() {
        let b = Basis::sqrt2();
        let f = gallery("IRR_INDICATOR").unwrap();
        let rationals: Vec<RealElement> = ["-3/2", "0", "1/3", "2"].iter().map(|s| el(&b, s)).collect();
        let r = check_homogeneity(&f, &rationals, 10, None).unwrap();
        assert_eq!(r.status, CheckStatus::NoViolation);
        assert_eq!(r.pairs_checked, 44);

        let r = check_homogeneity(&f, &[el(&b, "sqrt2")], 2, None).unwrap();
        assert_eq!(r.status, CheckStatus::Violation);
        let ws: Vec<(u64, &Value, &Value)> =
            r.witnesses.iter().map(|w| (w.n.unwrap(), &w.lhs, &w.rhs)).collect();
        // n = 0 gives S(0) = 0 = 0 * 1; n = 2 gives 1 vs 2
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].0, 2);
        assert_eq!(ws[0].1, &Value::Exact(el(&b, "1")));
        assert_eq!(ws[0].2, &Value::Exact(el(&b, "2")));

        let abs = check_homogeneity(&gallery("ABS").unwrap(), &rationals, 5, None).unwrap();
        assert_eq!(abs.status, CheckStatus::NoViolation);
        let shifted = check_homogeneity(&parse("t + 1").unwrap(), &[el(&b, "1")], 1, None).unwrap();
        assert_eq!(shifted.first_violation().unwrap().n, Some(0));
    }

    #[test]
    fn sqrt_pairs_are_not_flagged() {
        let b = Basis::sqrt2();
        let grid: Vec<RealElement> = ["-2", "-1/2", "0", "1/3", "sqrt2", "3"]
            .iter()
            .map(|s| el(&b, s))
            .collect();
        let r = check_subadditive(&gallery("SQRT_ABS").unwrap(), &grid, None).unwrap();
        assert_eq!(r.status, CheckStatus::NoViolation);
    }
}
