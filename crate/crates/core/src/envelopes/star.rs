use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::require_zero_at_origin;
use crate::checkers::{value_at, WORK_PRECISION};
use crate::funcdsl::FunctionExpr;
use crate::num::{self, Rational};
use crate::qspan::{Interval, RealElement};
use crate::{Error, Result};

pub const STAR_WINDOW: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeVerdict {
    Converged { value: Interval },
    DivergingPlusInfinity,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeSample {
    pub x: RealElement,
    pub n_max: u64,
    /// `(n, n S(x/n))` for `n = 1..=n_max`.
    pub partials: Vec<(u64, Interval)>,
    /// Sup of each trailing window of partials, oldest first.
    pub tail_sup_trace: Vec<Interval>,
    pub window: usize,
    #[serde(serialize_with = "num::ser_rational")]
    pub tol: Rational,
    pub exact: bool,
    pub verdict: EnvelopeVerdict,
    /// `S(x) <= S*(x) + tol`, when converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominates: Option<bool>,
}

impl EnvelopeSample {
    pub fn value(&self) -> Option<&Interval> {
        match &self.verdict {
            EnvelopeVerdict::Converged { value } => Some(value),
            _ => None,
        }
    }

    /// Largest partial computed, the finite stand-in for `S*(x)`.
    pub fn partial_sup(&self) -> Interval {
        sup(self.partials.iter().map(|(_, v)| v))
    }
}

fn sup<'a>(mut it: impl Iterator<Item = &'a Interval>) -> Interval {
    let first = it.next().expect("nonempty").clone();
    it.fold(first, |acc, v| acc.max(v))
}

/// Windows of `STAR_WINDOW` partials (fewer when `n_max < 3 * STAR_WINDOW`).
/// Converged: the last three window sups agree within `tol`. Diverging: the
/// last three strictly increase and the last is more than twice the first
/// window's sup plus one. Otherwise undetermined.
pub fn star_envelope(
    f: &FunctionExpr,
    x: &RealElement,
    n_max: u64,
    tol: Option<&Rational>,
) -> Result<EnvelopeSample> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be positive".into()));
    }
    require_zero_at_origin(f, x.basis())?;
    let values: Vec<(u64, crate::funcdsl::Value)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let q = num::int(n as i64);
            let v = value_at(f, &x.scale(&q.recip()))?;
            Ok((n, v.scale(&q)))
        })
        .collect::<Result<_>>()?;
    let exact = values.iter().all(|(_, v)| v.exact().is_some());
    let tol = tol.cloned().unwrap_or_else(|| {
        if exact {
            num::ratio(1, 1_000_000_000)
        } else {
            num::ratio(1, 1_000_000)
        }
    });
    let partials: Vec<(u64, Interval)> = values
        .into_iter()
        .map(|(n, v)| (n, v.enclose(WORK_PRECISION)))
        .collect();

    let window = STAR_WINDOW.min((partials.len() / 3).max(1));
    let start = partials.len() % window;
    let tail_sup_trace: Vec<Interval> = partials[start..]
        .chunks(window)
        .map(|c| sup(c.iter().map(|(_, v)| v)))
        .collect();
    let m = tail_sup_trace.len();
    let verdict = if m < 3 {
        EnvelopeVerdict::Undetermined
    } else {
        let last = &tail_sup_trace[m - 3..];
        let hi = last.iter().map(Interval::hi).max().expect("three");
        let lo = last.iter().map(Interval::lo).min().expect("three");
        if hi - lo <= tol {
            EnvelopeVerdict::Converged {
                value: last[2].clone(),
            }
        } else if last[0].lo() < last[1].lo()
            && last[1].lo() < last[2].lo()
            && *last[2].lo() > num::int(2) * tail_sup_trace[0].hi().max(&num::int(0)) + num::int(1)
        {
            EnvelopeVerdict::DivergingPlusInfinity
        } else {
            EnvelopeVerdict::Undetermined
        }
    };
    let dominates = match &verdict {
        EnvelopeVerdict::Converged { value } => {
            let s = value_at(f, x)?.enclose(WORK_PRECISION);
            Some(*s.lo() <= value.hi() + &tol)
        }
        _ => None,
    };
    Ok(EnvelopeSample {
        x: x.clone(),
        n_max,
        partials,
        tail_sup_trace,
        window,
        tol,
        exact,
        verdict,
        dominates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::gallery;
    use crate::qspan::Basis;

    fn star(name: &str, x: &str, n: u64) -> EnvelopeSample {
        let b = Basis::sqrt2();
        star_envelope(&gallery(name).unwrap(), &RealElement::parse(&b, x).unwrap(), n, None).unwrap()
    }

    #[test]
    fn indicator_envelope() {
        let s = star("IRR_INDICATOR", "sqrt2", 2000);
        assert_eq!(s.verdict, EnvelopeVerdict::DivergingPlusInfinity);
        assert!(s.exact);
        for (n, v) in &s.partials {
            assert_eq!(*v, Interval::point(num::int(*n as i64)));
        }
        let r = star("IRR_INDICATOR", "1/2", 2000);
        assert_eq!(r.verdict, EnvelopeVerdict::Converged { value: Interval::zero() });
        assert!(r.partials.iter().all(|(_, v)| *v == Interval::zero()));
        assert_eq!(r.dominates, Some(true));
    }

    #[test]
    fn abs_envelope_is_constant() {
        let s = star("ABS", "-3", 500);
        assert_eq!(s.verdict, EnvelopeVerdict::Converged { value: Interval::point(num::int(3)) });
        assert!(s.partials.iter().all(|(_, v)| *v == Interval::point(num::int(3))));
    }

    #[test]
    fn sqrt_envelope_diverges() {
        assert_eq!(star("SQRT_ABS", "1", 1000).verdict, EnvelopeVerdict::DivergingPlusInfinity);
    }

    #[test]
    fn short_runs_are_undetermined() {
        assert_eq!(star("ABS", "1", 2).verdict, EnvelopeVerdict::Undetermined);
        let b = Basis::sqrt2();
        let g = crate::funcdsl::parse("abs(t) + 1").unwrap();
        assert!(star_envelope(&g, &RealElement::integer(&b, 1), 10, None).is_err());
    }
}
