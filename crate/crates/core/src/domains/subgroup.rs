use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::DomainError;
use crate::num::{self, Rational};
use crate::qspan::{Basis, QspanError, RealElement};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

// candidate-generation work (outer tuples x denominators) allowed per call
const WORK_LIMIT: u128 = 400_000_000;

/// Closed window `[lo, hi]` and coefficient height bound.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub lo: RealElement,
    pub hi: RealElement,
    pub height: u64,
}

impl GridSpec {
    pub fn new(lo: RealElement, hi: RealElement, height: u64) -> Result<GridSpec, DomainError> {
        if height == 0 {
            return Err(DomainError::InvalidGrid("height must be at least 1".into()));
        }
        if lo.compare(&hi)? != Ordering::Less {
            return Err(DomainError::InvalidGrid(format!(
                "window [{}, {}] is empty or degenerate",
                lo, hi
            )));
        }
        Ok(GridSpec { lo, hi, height })
    }

    pub fn symmetric(basis: &Arc<Basis>, radius: Rational, height: u64) -> Result<GridSpec, DomainError> {
        GridSpec::new(
            RealElement::rational(basis, -radius.clone()),
            RealElement::rational(basis, radius),
            height,
        )
    }
}

#[derive(Clone, Debug)]
pub struct DenseSubgroup {
    generators: Vec<RealElement>,
    divisible: bool,
    basis: Arc<Basis>,
    dense: bool,
}

impl DenseSubgroup {
    pub fn new(generators: Vec<RealElement>, divisible: bool) -> Result<DenseSubgroup, DomainError> {
        let first = generators.first().ok_or(DomainError::AllZero)?;
        let basis = first.basis().clone();
        for g in &generators {
            if !g.same_basis(first) {
                return Err(QspanError::BasisMismatch {
                    left: basis.to_string(),
                    right: g.basis().to_string(),
                }
                .into());
            }
        }
        let nonzero: Vec<&RealElement> = generators.iter().filter(|g| !g.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(DomainError::AllZero);
        }
        // independent basis: two generators have a rational ratio iff their
        // coordinate vectors are proportional
        let dense = divisible
            || nonzero.iter().enumerate().any(|(i, a)| {
                nonzero[i + 1..].iter().any(|b| a.ratio_to(b).is_none())
            });
        Ok(DenseSubgroup {
            generators,
            divisible,
            basis,
            dense,
        })
    }

    /// ℚ as the divisible hull of 1.
    pub fn rationals(basis: &Arc<Basis>) -> DenseSubgroup {
        DenseSubgroup::new(vec![RealElement::integer(basis, 1)], true).expect("1 is nonzero")
    }

    /// `<1, c_1, ..., c_k>` over every basis constant; `divisible` gives the ℚ-span.
    pub fn full_span(basis: &Arc<Basis>, divisible: bool) -> DenseSubgroup {
        let gens = (0..basis.len())
            .map(|i| RealElement::unit(basis, i, Rational::one()))
            .collect();
        DenseSubgroup::new(gens, divisible).expect("1 is nonzero")
    }

    /// `Q` (rationals), `<g1, g2, ...>` (integer combinations) or
    /// `Q<g1, g2, ...>` (rational combinations), with element literals.
    pub fn parse(basis: &Arc<Basis>, text: &str) -> Result<DenseSubgroup, DomainError> {
        let t = text.trim();
        if t == "Q" {
            return Ok(DenseSubgroup::rationals(basis));
        }
        let (divisible, rest) = match t.strip_prefix('Q') {
            Some(r) => (true, r.trim_start()),
            None => (false, t),
        };
        let inner = rest
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| {
                DomainError::Syntax(format!(
                    "subgroup `{}`: expected `Q`, `<g1, ...>` or `Q<g1, ...>`",
                    text
                ))
            })?;
        let gens = inner
            .split(',')
            .map(|g| RealElement::parse(basis, g.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        DenseSubgroup::new(gens, divisible)
    }

    pub fn generators(&self) -> &[RealElement] {
        &self.generators
    }

    pub fn divisible(&self) -> bool {
        self.divisible
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn is_dense(&self) -> bool {
        self.dense
    }

    /// Coordinates of `x` in terms of the generators when they are linearly
    /// independent over ℚ; `None` when `x` is outside their ℚ-span or the
    /// generators are dependent.
    pub fn coefficients(&self, x: &RealElement) -> Option<Vec<Rational>> {
        if !x.same_basis(&self.generators[0]) {
            return None;
        }
        let k = self.generators.len();
        let n = self.basis.len();
        // augmented rows: one per basis coordinate
        let mut rows: Vec<Vec<Rational>> = (0..n)
            .map(|r| {
                let mut row: Vec<Rational> =
                    self.generators.iter().map(|g| g.coords()[r].clone()).collect();
                row.push(x.coords()[r].clone());
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..k {
            let Some(pr) = (r..n).find(|&i| !rows[i][c].is_zero()) else {
                return None;
            };
            rows.swap(r, pr);
            let inv = rows[r][c].recip();
            for v in rows[r].iter_mut() {
                *v = &*v * &inv;
            }
            for i in 0..n {
                if i != r && !rows[i][c].is_zero() {
                    let f = rows[i][c].clone();
                    for j in 0..=k {
                        let d = &f * &rows[r][j];
                        rows[i][j] -= d;
                    }
                }
            }
            pivots.push(r);
            r += 1;
        }
        if rows[r..].iter().any(|row| !row[k].is_zero()) {
            return None;
        }
        Some(pivots.iter().map(|&pr| rows[pr][k].clone()).collect())
    }

    /// Exact membership; `None` when undecidable here (dependent generators
    /// without divisibility).
    pub fn contains(&self, x: &RealElement) -> Option<bool> {
        if !x.same_basis(&self.generators[0]) {
            return Some(false);
        }
        match self.coefficients(x) {
            Some(c) => Some(self.divisible || c.iter().all(|q| q.is_integer())),
            None => {
                if self.divisible {
                    Some(self.in_span_dependent(x))
                } else if self.independent() {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    fn independent(&self) -> bool {
        let zero = RealElement::zero(&self.basis);
        // the zero vector has unique coefficients iff the generators are independent
        self.coefficients(&zero).is_some()
    }

    fn in_span_dependent(&self, x: &RealElement) -> bool {
        // reduce to a maximal independent subfamily, greedily
        let mut kept: Vec<RealElement> = Vec::new();
        for g in &self.generators {
            let mut trial = kept.clone();
            trial.push(g.clone());
            let sub = DenseSubgroup {
                generators: trial.clone(),
                divisible: true,
                basis: self.basis.clone(),
                dense: true,
            };
            if sub.independent() {
                kept = trial;
            }
        }
        if kept.is_empty() {
            return x.is_zero();
        }
        let sub = DenseSubgroup {
            generators: kept,
            divisible: true,
            basis: self.basis.clone(),
            dense: true,
        };
        sub.coefficients(x).is_some()
    }

    /// Largest reduced-coefficient height needed to write `x`, when the
    /// generators are independent.
    pub fn height_of(&self, x: &RealElement) -> Option<u64> {
        let c = self.coefficients(x)?;
        c.iter()
            .map(|q| {
                let n = q.numer().abs().to_u64()?;
                let d = q.denom().to_u64()?;
                Some(n.max(d))
            })
            .try_fold(0u64, |m, h| h.map(|h| m.max(h)))
    }

    /// Exactly the subgroup elements of height `<= H` in the window, sorted.
    pub fn enumerate(&self, spec: &GridSpec) -> Result<Vec<RealElement>, DomainError> {
        self.enumerate_with_cap(spec, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(
        &self,
        spec: &GridSpec,
        cap: usize,
    ) -> Result<Vec<RealElement>, DomainError> {
        let coeffs = coefficient_set(spec.height, self.divisible, usize::MAX);
        let search = Search::new(self, &spec.lo, &spec.hi, spec.height)?;
        let outer = search.outer_tuples(&coeffs, usize::MAX, cap)?;
        let found: Vec<Vec<RealElement>> = outer
            .par_iter()
            .map(|rest| search.solve_pivot(rest, usize::MAX))
            .collect::<Result<_, _>>()?;
        let total: usize = found.iter().map(Vec::len).sum();
        if total > cap {
            return Err(DomainError::TooMany {
                count: total,
                cap,
            });
        }
        Ok(sort_dedup(found.into_iter().flatten().collect())?)
    }

    /// Deterministic sample of subgroup elements in `[center - r, center + r]`:
    /// pivot coefficients range over height `<= H`, the remaining generators
    /// over the first `outer_budget` coefficient tuples in height order.
    /// Each outer tuple contributes at most its share of `max_points`
    /// (lowest pivot denominators first); stops after `max_points`.
    pub fn sample_ball(
        &self,
        center: &RealElement,
        radius: &Rational,
        height: u64,
        max_points: usize,
        outer_budget: usize,
    ) -> Result<Vec<RealElement>, DomainError> {
        let lo = center.add_rational(&-radius);
        let hi = center.add_rational(radius);
        let coeffs = coefficient_set(height, self.divisible, outer_budget);
        let search = Search::new(self, &lo, &hi, height)?;
        let outer = search.outer_tuples(&coeffs, outer_budget, usize::MAX)?;
        let share = max_points.div_ceil(outer.len().max(1)).max(1);
        let mut out = Vec::new();
        for chunk in outer.chunks(64) {
            let found: Vec<Vec<RealElement>> = chunk
                .par_iter()
                .map(|rest| search.solve_pivot(rest, share))
                .collect::<Result<_, _>>()?;
            out.extend(found.into_iter().flatten());
            if out.len() >= max_points {
                out.truncate(max_points);
                break;
            }
        }
        Ok(sort_dedup(out)?)
    }
}

impl fmt::Display for DenseSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        if self.divisible {
            write!(f, "Q<{}>", gens.join(", "))
        } else {
            write!(f, "<{}>", gens.join(", "))
        }
    }
}

/// Reduced coefficients of height `<= H`, ordered by height then value;
/// stops after the first complete height layer reaching `limit` entries.
fn coefficient_set(h: u64, divisible: bool, limit: usize) -> Vec<(i64, i64)> {
    let h = h as i64;
    let mut out = vec![(0i64, 1i64)];
    for level in 1..=h {
        if out.len() >= limit {
            break;
        }
        let mut layer = Vec::new();
        if divisible {
            // |p| = level with q <= level, or q = level with |p| < level
            for q in 1..=level {
                if level.gcd(&q) == 1 {
                    layer.push((-level, q));
                    layer.push((level, q));
                }
            }
            for p in 1..level {
                if p.gcd(&level) == 1 {
                    layer.push((-p, level));
                    layer.push((p, level));
                }
            }
        } else {
            layer.push((-level, 1));
            layer.push((level, 1));
        }
        layer.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
        out.extend(layer);
    }
    out
}

fn approx(x: &RealElement) -> f64 {
    x.enclose(64).midpoint().to_f64().unwrap_or(f64::NAN)
}

struct Search<'a> {
    group: &'a DenseSubgroup,
    lo: &'a RealElement,
    hi: &'a RealElement,
    height: i64,
    pivot: usize,
    pivot_f: f64,
    lo_f: f64,
    hi_f: f64,
}

impl<'a> Search<'a> {
    fn new(
        group: &'a DenseSubgroup,
        lo: &'a RealElement,
        hi: &'a RealElement,
        height: u64,
    ) -> Result<Search<'a>, DomainError> {
        if !lo.same_basis(&group.generators[0]) || !hi.same_basis(&group.generators[0]) {
            return Err(QspanError::BasisMismatch {
                left: group.basis.to_string(),
                right: lo.basis().to_string(),
            }
            .into());
        }
        let pivot = group
            .generators
            .iter()
            .position(|g| !g.is_zero())
            .ok_or(DomainError::AllZero)?;
        Ok(Search {
            group,
            lo,
            hi,
            height: height as i64,
            pivot,
            pivot_f: approx(&group.generators[pivot]),
            lo_f: approx(lo),
            hi_f: approx(hi),
        })
    }

    /// Partial sums over the non-pivot generators.
    fn outer_tuples(
        &self,
        coeffs: &[(i64, i64)],
        budget: usize,
        cap: usize,
    ) -> Result<Vec<RealElement>, DomainError> {
        let others: Vec<&RealElement> = self
            .group
            .generators
            .iter()
            .enumerate()
            .filter(|(i, g)| *i != self.pivot && !g.is_zero())
            .map(|(_, g)| g)
            .collect();
        let dens = if self.group.divisible { self.height as u128 } else { 1 };
        let full = (coeffs.len() as u128).saturating_pow(others.len() as u32);
        let tuples = full.min(budget as u128);
        if tuples.saturating_mul(dens) > WORK_LIMIT || tuples > cap as u128 * 64 {
            return Err(DomainError::TooMany {
                count: tuples.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let mut out = Vec::with_capacity(tuples as usize);
        let mut idx = vec![0usize; others.len()];
        // odometer in height order: index 0 is the zero coefficient
        loop {
            if out.len() >= budget {
                break;
            }
            let mut rest = RealElement::zero(&self.group.basis);
            for (g, &i) in others.iter().zip(&idx) {
                let (p, q) = coeffs[i];
                if p != 0 {
                    rest = rest.add(&g.scale(&num::ratio(p, q)))?;
                }
            }
            out.push(rest);
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return Ok(out);
                }
                idx[pos] += 1;
                if idx[pos] < coeffs.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
        Ok(out)
    }

    /// Pivot multiples landing in the window, by ascending denominator, at
    /// most `limit` of them. Candidates well inside the float window are
    /// accepted directly; only those near an end are compared exactly.
    fn solve_pivot(&self, rest: &RealElement, limit: usize) -> Result<Vec<RealElement>, DomainError> {
        let g = &self.group.generators[self.pivot];
        let rest_f = approx(rest);
        let (mut a, mut b) = (
            (self.lo_f - rest_f) / self.pivot_f,
            (self.hi_f - rest_f) / self.pivot_f,
        );
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let margin = 1e-9 * (1.0 + a.abs().max(b.abs()));
        let (inner_a, inner_b) = (a + margin, b - margin);
        let (a, b) = (a - margin, b + margin);
        let h = self.height;
        if b < -(h as f64) || a > h as f64 {
            return Ok(Vec::new());
        }
        let max_q = if self.group.divisible { h } else { 1 };
        let mut out = Vec::new();
        for q in 1..=max_q {
            let pmin = ((a * q as f64).ceil() as i64).max(-h);
            let pmax = ((b * q as f64).floor() as i64).min(h);
            for p in pmin..=pmax {
                if p.abs().gcd(&q) != 1 && !(p == 0 && q == 1) {
                    continue;
                }
                let e = rest.add(&g.scale(&num::ratio(p, q)))?;
                let c = p as f64 / q as f64;
                if (c > inner_a && c < inner_b)
                    || (e.compare(self.lo)? != Ordering::Less
                        && e.compare(self.hi)? != Ordering::Greater)
                {
                    out.push(e);
                    if out.len() >= limit {
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Sorts ascending by exact comparison and removes duplicates.
pub fn sort_dedup(mut xs: Vec<RealElement>) -> Result<Vec<RealElement>, QspanError> {
    let err: RefCell<Option<QspanError>> = RefCell::new(None);
    let keys: Vec<f64> = xs.iter().map(approx).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| {
        let d = keys[i] - keys[j];
        if d.abs() > 1e-6 * (1.0 + keys[i].abs()) {
            return d.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        xs[i].compare(&xs[j]).unwrap_or_else(|e| {
            err.borrow_mut().get_or_insert(e);
            Ordering::Equal
        })
    });
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let mut taken: Vec<Option<RealElement>> = xs.drain(..).map(Some).collect();
    let mut out: Vec<RealElement> = Vec::with_capacity(order.len());
    for i in order {
        let x = taken[i].take().expect("each index once");
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    Ok(out)
}
