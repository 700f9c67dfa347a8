use proptest::prelude::*;
use qcflp::solver::{entails, ground_holds, satisfiable, EntailVerdict, SatVerdict};
use qcflp::syntax::parse_cflp_goal;
use qcflp::{Atom, Expr, Subst, Var};

fn linear() -> impl Strategy<Value = String> {
    (
        -3..=3i32,
        -3..=3i32,
        prop::sample::select(vec!["<", "<=", ">", ">=", "=="]),
        -6..=6i32,
    )
        .prop_map(|(a, b, op, c)| format!("{a} * X + {b} * Y {op} {c}"))
}

fn atoms(src: &[String]) -> Vec<Atom> {
    parse_cflp_goal(&src.join(", "), None).unwrap().atoms
}

fn holds_at(cs: &[Atom], x: f64, y: f64) -> bool {
    let s: Subst = [(Var::new("X"), Expr::num(x)), (Var::new("Y"), Expr::num(y))].into_iter().collect();
    cs.iter().all(|a| ground_holds(&a.apply(&s)) == Some(true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn witnesses_satisfy_every_constraint(src in prop::collection::vec(linear(), 1..4)) {
        let cs = atoms(&src);
        if let SatVerdict::Sat(w) = satisfiable(&cs) {
            for a in &cs {
                let g = a.apply(&w);
                prop_assert_eq!(ground_holds(&g), Some(true), "{} under {:?}", a, w);
            }
        }
    }

    #[test]
    fn grid_solutions_are_never_unsat(src in prop::collection::vec(linear(), 1..4)) {
        let cs = atoms(&src);
        let found = (-20..=20).any(|i| (-20..=20).any(|j| holds_at(&cs, i as f64 / 2.0, j as f64 / 2.0)));
        if found {
            prop_assert_ne!(satisfiable(&cs), SatVerdict::Unsat, "{:?}", src);
        }
    }

    #[test]
    fn entailment_counterexamples_are_genuine(src in prop::collection::vec(linear(), 1..3), goal in linear()) {
        let cs = atoms(&src);
        let g = atoms(&[goal])[0].clone();
        if let EntailVerdict::NotEntailed(w) = entails(&cs, &g) {
            for a in &cs {
                prop_assert_eq!(ground_holds(&a.apply(&w)), Some(true), "{}", a);
            }
            prop_assert_eq!(ground_holds(&g.apply(&w)), Some(false), "{}", g);
        }
    }

    #[test]
    fn entailed_goals_hold_on_grid_solutions(src in prop::collection::vec(linear(), 1..3), goal in linear()) {
        let cs = atoms(&src);
        let g = atoms(&[goal])[0].clone();
        if entails(&cs, &g) == EntailVerdict::Entailed {
            for i in -20..=20 {
                for j in -20..=20 {
                    let (x, y) = (i as f64 / 2.0, j as f64 / 2.0);
                    if holds_at(&cs, x, y) {
                        prop_assert!(holds_at(std::slice::from_ref(&g), x, y), "{} at ({}, {})", g, x, y);
                    }
                }
            }
        }
    }
}
