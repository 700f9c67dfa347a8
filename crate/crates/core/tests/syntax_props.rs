mod common;

use common::random_program;
use proptest::prelude::*;
use qcflp::syntax::{parse_expr, parse_program, print_program, ParseOptions};
use qcflp::{Expr, QualDomain};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..100i32).prop_map(|n| Expr::num(n as f64 / 4.0)),
        prop::sample::select(vec!["X", "Y", "Zs"]).prop_map(Expr::var),
        prop::sample::select(vec!["a", "nil", "true"]).prop_map(|c| Expr::app(c, Vec::new())),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["+", "-", "*", "/"]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::app(op, vec![l, r])),
            (prop::sample::select(vec!["<", "<=", "=="]), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::app(op, vec![l, r])),
            prop::collection::vec(inner, 1..3).prop_map(|xs| Expr::app("g", xs)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn expressions_round_trip(e in expr()) {
        let text = e.to_string();
        let back = parse_expr(&text);
        prop_assert_eq!(back.as_ref().ok(), Some(&e), "{}", text);
    }

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let (src, _) = random_program(&mut StdRng::seed_from_u64(seed));
        let opts = ParseOptions::new(QualDomain::U);
        let p = parse_program(&src, &opts).unwrap();
        let text = print_program(&p);
        let q = parse_program(&text, &opts).unwrap();
        prop_assert_eq!(print_program(&q), text);
        prop_assert_eq!(q, p);
    }
}

#[test]
fn library_round_trips_through_printer() {
    let p = common::library();
    let text = print_program(&p);
    assert_eq!(parse_program(&text, &ParseOptions::new(QualDomain::U)).unwrap(), p);
}
