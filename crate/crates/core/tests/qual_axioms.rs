mod common;

use common::{axiom_violations, uxu, Q};
use proptest::prelude::*;
use qcflp::{QualDomain, QualValue};

fn component() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(1.0), 8 => 0.0..=1.0f64]
}

fn value(width: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(component(), width)
}

fn build(dom: &QualDomain, c: &[f64]) -> Q {
    dom.from_components(c).unwrap()
}

/// `d ∘ e = e` with neither being an extreme: `d` is `⊤` exactly where `e`
/// is nonzero.
fn boundary_pair(d: &Q, e: &Q) -> bool {
    d.components()
        .iter()
        .zip(e.components())
        .all(|(x, y)| *x == 1.0 || y == 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn certainty_domain_axioms(d in value(1), e in value(1), f in value(1)) {
        let u = QualDomain::U;
        let v = axiom_violations(&u, &build(&u, &d), &build(&u, &e), &build(&u, &f));
        prop_assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn product_domain_axioms(d in value(2), e in value(2), f in value(2)) {
        let dom = uxu();
        let (d, e, f) = (build(&dom, &d), build(&dom, &e), build(&dom, &f));
        let v: Vec<_> = axiom_violations(&dom, &d, &e, &f)
            .into_iter()
            .filter(|name| !(*name == "strict" && boundary_pair(&d, &e)))
            .collect();
        prop_assert!(v.is_empty(), "{v:?}");
    }
}

#[test]
fn product_strictness_fails_on_mixed_boundary_pairs() {
    let dom = uxu();
    let pair = |a, b| QualValue::pair(QualValue::Real(a), QualValue::Real(b));
    let (d, e) = (pair(1.0, 0.5), pair(0.3, 0.0));
    assert_eq!(dom.attenuate(&d, &e).unwrap(), e);
    assert_eq!(axiom_violations(&dom, &d, &e, &e), vec!["strict"]);
}

#[test]
fn certainty_counterexample_free_on_a_grid() {
    let u = QualDomain::U;
    let grid: Vec<Q> = (0..=10).map(|i| QualValue::Real(i as f64 / 10.0)).collect();
    for d in &grid {
        for e in &grid {
            for f in &grid {
                assert!(axiom_violations(&u, d, e, f).is_empty(), "{d} {e} {f}");
            }
        }
    }
}
