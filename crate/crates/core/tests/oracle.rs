use qcflp::oracle::{default_universe, mutants, mutation_check, run_oracle, Outcome, OracleConfig};
use qcflp::syntax::{parse_expr, parse_program, ParseOptions};
use qcflp::transform::transform_program;
use qcflp::{QualDomain, QualValue};

fn program(src: &str) -> qcflp::Program {
    parse_program(src, &ParseOptions::new(QualDomain::U)).unwrap()
}

const HALF: &str = "data nat = z | s(nat)\nhalf(z) -0.9-> z\nhalf(s(z)) -0.8-> z\nhalf(s(s(X))) -0.9-> s(half(X))";
const EVEN: &str = "data nat = z | s(nat)\nnot(true) --> false\nnot(false) -0.7-> true\nev(z) -0.9-> true\nev(s(X)) -0.8-> not(ev(X))";

fn config(p: &qcflp::Program) -> OracleConfig {
    OracleConfig::new(6, default_universe(p, 20))
}

#[test]
fn constant_function_matches() {
    let p = program("f --> true");
    let r = run_oracle(&p, &QualDomain::U, &config(&p)).unwrap();
    let c = &r.comparisons[0];
    assert_eq!(c.call.to_string(), "f");
    assert_eq!(c.outcome, Outcome::Match);
    assert_eq!(c.expected, vec![(parse_expr("true").unwrap(), vec![QualValue::Real(1.0)])]);
    assert_eq!(r.mismatches(), 0);
}

#[test]
fn attenuated_constant_matches_at_its_factor() {
    let p = program("g -0.9-> true");
    let r = run_oracle(&p, &QualDomain::U, &config(&p)).unwrap();
    assert_eq!(r.comparisons[0].actual, vec![(parse_expr("true").unwrap(), vec![QualValue::Real(0.9)])]);
    assert_eq!(r.mismatches(), 0);
}

#[test]
fn recursive_programs_agree() {
    for src in [HALF, EVEN] {
        let p = program(src);
        let r = run_oracle(&p, &QualDomain::U, &config(&p)).unwrap();
        assert_eq!(r.mismatches(), 0, "{r}");
        assert!(!r.partial);
    }
}

#[test]
fn half_of_four_is_two_at_0729() {
    // 0.9 for the outer step, 0.9 for the inner step, 0.9 for half(z)
    let p = program(HALF);
    let r = run_oracle(&p, &QualDomain::U, &config(&p)).unwrap();
    let c = r
        .comparisons
        .iter()
        .find(|c| c.call.to_string() == "half(s(s(s(s(z)))))" && c.probe.is_none())
        .unwrap();
    let (res, qs) = &c.actual[0];
    assert_eq!(res.to_string(), "s(s(z))");
    assert!((qs[0].as_real().unwrap() - 0.9 * 0.9 * 0.9).abs() < 1e-9);
}

#[test]
fn dropping_the_head_qval_is_detected() {
    let p = program("g -0.9-> true");
    let m = mutation_check(&p, &QualDomain::U, &config(&p)).unwrap();
    assert!(m.detected.iter().any(|d| d.contains("qVal")), "{m:?}");
}

#[test]
fn every_undetected_mutant_is_implied() {
    for src in ["f --> true", "g -0.9-> true", HALF, EVEN] {
        let p = program(src);
        let (t, _) = transform_program(&p, &QualDomain::U, 0).unwrap();
        let m = mutation_check(&p, &QualDomain::U, &config(&p)).unwrap();
        assert_eq!(m.total(), mutants(&t.program).len());
        assert!(m.survived.is_empty(), "{src}: {:?}", m.survived);
        assert!(!m.detected.is_empty());
    }
}

#[test]
fn oversized_programs_are_refused() {
    let p = program(EVEN);
    let mut cfg = config(&p);
    cfg.max_rules = 3;
    assert!(run_oracle(&p, &QualDomain::U, &cfg).is_err());
}

#[test]
fn product_domain_agrees() {
    let dom: QualDomain = "uxu".parse().unwrap();
    let p = parse_program(
        "data nat = z | s(nat)\nk(z) -(0.9, 0.5)-> true\nk(s(X)) -(0.5, 0.9)-> k(X)",
        &ParseOptions::new(dom.clone()),
    )
    .unwrap();
    let r = run_oracle(&p, &dom, &OracleConfig::new(5, default_universe(&p, 8))).unwrap();
    assert_eq!(r.mismatches(), 0, "{r}");
    assert!(r.matches() > 0);
}
