use qcflp::syntax::{parse_goal, parse_program, parse_statement, print_program, ParseOptions};
use qcflp::{QualDomain, QualValue};

const LIBRARY: &str = include_str!("data/library.qcflp");

fn opts() -> ParseOptions {
    ParseOptions::new(QualDomain::U)
}

#[test]
fn library_has_24_rules() {
    let p = parse_program(LIBRARY, &opts()).unwrap();
    assert_eq!(p.rules.len(), 24);
    let mut alphas: Vec<f64> = p.rules.iter().filter_map(|r| r.alpha.as_real()).collect();
    alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    alphas.dedup();
    assert_eq!(alphas, vec![1.0, 0.9, 0.8, 0.7]);
}

#[test]
fn library_round_trips() {
    let p = parse_program(LIBRARY, &opts()).unwrap();
    let text = print_program(&p);
    let q = parse_program(&text, &opts()).unwrap();
    assert_eq!(p, q, "{text}");
}

#[test]
fn member_rule_shape() {
    let p = parse_program("member(B,[]) --> false", &opts()).unwrap();
    let r = &p.rules[0];
    assert_eq!(r.head.as_str(), "member");
    assert_eq!(r.params.len(), 2);
    assert_eq!(r.alpha, QualValue::Real(1.0));
    assert_eq!(r.rhs.to_string(), "false");
    assert!(r.conds.is_empty());
}

#[test]
fn non_linear_head_is_rejected() {
    let err = parse_program("f(X,X) --> X", &opts()).unwrap_err();
    assert!(err.to_string().contains("twice"), "{err}");
}

#[test]
fn goal_parses() {
    let p = parse_program(LIBRARY, &opts()).unwrap();
    let g = parse_goal(
        r#"(search("German","Essay",intermediate) == R) # W | W >= 0.65"#,
        Some(&p),
        &opts(),
    )
    .unwrap();
    assert_eq!(g.parts.len(), 1);
    assert_eq!(g.parts[0].threshold, Some(QualValue::Real(0.65)));
    assert_eq!(g.to_string(), r#"search("German", "Essay", intermediate) == R # W | W >= 0.65"#);
}

#[test]
fn duplicate_goal_variable_is_rejected() {
    assert!(parse_goal("a == true # W, b == true # W", None, &opts()).is_err());
}

#[test]
fn statements_parse() {
    let s = parse_statement("(f(X:Xs) -> Xs) # 0.8 <== X*X /= 0", None).unwrap();
    assert_eq!(s.to_string(), "(f(X : Xs) -> Xs) # 0.8 <== X * X /= 0");
    let t = parse_statement("(f(A:(B:[])) -> _|_ : _|_) # 0.7 <== A < 0", None).unwrap();
    assert_eq!(t.to_string(), "(f([A, B]) -> _|_ : _|_) # 0.7 <== A < 0");
}
