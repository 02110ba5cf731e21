use std::cmp::Ordering;
use std::sync::Arc;

use proptest::prelude::*;
use subadd_core::checkers::{check_subadditive, CheckStatus};
use subadd_core::funcdsl::{certify_structure, evaluate_value, parse, FunctionExpr};
use subadd_core::num::{self, Rational};
use subadd_core::{Basis, Interval, RealElement};

fn basis() -> Arc<Basis> {
    Basis::sqrt2_sqrt3()
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| num::ratio(p, q))
}

fn element() -> impl Strategy<Value = RealElement> {
    prop::collection::vec(small_rational(), 3).prop_map(|c| RealElement::new(basis(), c).unwrap())
}

fn expr() -> impl Strategy<Value = FunctionExpr> {
    let leaf = prop_oneof![
        Just(FunctionExpr::Var),
        small_rational().prop_map(FunctionExpr::Const),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::Sub(Box::new(a), Box::new(b))),
            (small_rational(), inner.clone()).prop_map(|(c, a)| FunctionExpr::scale(c, a)),
            inner.clone().prop_map(|a| FunctionExpr::Abs(Box::new(a))),
            inner.clone().prop_map(|a| FunctionExpr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::max(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::min(a, b)),
            inner.clone().prop_map(|a| FunctionExpr::SqrtAbs(Box::new(a))),
            inner.clone().prop_map(|a| FunctionExpr::IndicatorIrr(Box::new(a))),
            inner.prop_map(|a| FunctionExpr::PiecewiseZero(Box::new(a))),
        ]
    })
}

/// Positively homogeneous building blocks only, so certified expressions
/// are common.
fn sublinear_expr() -> impl Strategy<Value = FunctionExpr> {
    let coef = (0i64..=6, 1i64..=4).prop_map(|(p, q)| num::ratio(p, q));
    let leaf = prop_oneof![
        small_rational().prop_map(|c| FunctionExpr::scale(c, FunctionExpr::Var)),
        Just(FunctionExpr::Abs(Box::new(FunctionExpr::Var))),
    ];
    leaf.prop_recursive(3, 12, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FunctionExpr::max(a, b)),
            (coef.clone(), inner).prop_map(|(c, a)| FunctionExpr::scale(c, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn element_field_laws(x in element(), y in element(), q in small_rational()) {
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x.clone());
        let lhs = x.add(&y).unwrap().scale(&q);
        let rhs = x.scale(&q).add(&y.scale(&q)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn element_display_round_trips(x in element()) {
        prop_assert_eq!(RealElement::parse(&basis(), &x.to_string()).unwrap(), x);
    }

    #[test]
    fn comparison_agrees_with_enclosures(x in element(), y in element()) {
        let (a, b) = (x.enclose(64), y.enclose(64));
        match x.compare(&y).unwrap() {
            Ordering::Less => prop_assert!(a.lo() < b.hi()),
            Ordering::Greater => prop_assert!(a.hi() > b.lo()),
            Ordering::Equal => prop_assert_eq!(x.clone(), y.clone()),
        }
        prop_assert_eq!(x.compare(&y).unwrap(), y.compare(&x).unwrap().reverse());
    }

    #[test]
    fn enclosures_nest(x in element()) {
        let coarse = x.enclose(32);
        let fine = x.enclose(128);
        prop_assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
    }

    #[test]
    fn interval_products_contain_point_products(a in small_rational(), b in small_rational(), w in 0i64..5) {
        let wa = num::ratio(w, 7);
        let ia = Interval::new(&a - &wa, &a + &wa).unwrap();
        let ib = Interval::new(&b - &wa, &b + &wa).unwrap();
        prop_assert!(ia.mul(&ib).contains(&(&a * &b)));
        prop_assert!(ia.add(&ib).contains(&(&a + &b)));
    }

    #[test]
    fn printer_round_trips(e in expr()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
    }

    #[test]
    fn reflection_is_evaluation_at_minus_t(e in expr(), x in element()) {
        let direct = evaluate_value(&e, &x.neg(), 64);
        let reflected = evaluate_value(&e.reflect(), &x, 64);
        match (direct, reflected) {
            (Ok(a), Ok(b)) => {
                let (a, b) = (a.enclose(64), b.enclose(64));
                prop_assert!(a.lo() <= b.hi() && b.lo() <= a.hi(), "{} vs {}", a, b);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn certified_sublinear_has_no_violations(e in sublinear_expr(), pts in prop::collection::vec(element(), 1..6)) {
        let cert = certify_structure(&e);
        prop_assume!(cert.subadditive());
        let r = check_subadditive(&e, &pts, None).unwrap();
        prop_assert_eq!(r.status, CheckStatus::NoViolation);
        // positive homogeneity at n = 2, 3
        for x in &pts {
            let v = evaluate_value(&e, x, 64).unwrap();
            for n in [2i64, 3] {
                let w = evaluate_value(&e, &x.scale(&num::int(n)), 64).unwrap();
                prop_assert_eq!(w.exact().unwrap(), &v.exact().unwrap().scale(&num::int(n)));
            }
        }
    }
}
