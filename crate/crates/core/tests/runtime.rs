use std::time::{Duration, Instant};

use qcflp::runtime::{solve, solve_qualified, SolveLimits};
use qcflp::syntax::{parse_cflp_goal, parse_goal, parse_program, ParseOptions};
use qcflp::{CflpGoal, QualDomain};

const LIBRARY: &str = include_str!("data/library.qcflp");
const QUERY: &str = "search(\"German\", \"Essay\", intermediate) == R # W | W >= ";

fn library() -> qcflp::Program {
    parse_program(LIBRARY, &ParseOptions::new(QualDomain::U)).unwrap()
}

fn library_answers(threshold: &str, simplify: bool) -> Vec<String> {
    let p = library();
    let g = parse_goal(&format!("{QUERY}{threshold}"), Some(&p), &ParseOptions::new(QualDomain::U)).unwrap();
    let sols = solve_qualified(&p, &QualDomain::U, &g, &SolveLimits::default(), simplify).unwrap();
    sols.answers.iter().map(|a| a.to_string()).collect()
}

#[test]
fn library_goal_first_answer() {
    let t = Instant::now();
    let answers = library_answers("0.65", false);
    assert!(t.elapsed() < Duration::from_secs(5));
    assert_eq!(answers[0], "{ R -> 4 } { W in [0.65, 0.7] }");
}

#[test]
fn library_goal_simplified_agrees() {
    assert_eq!(library_answers("0.65", true), library_answers("0.65", false));
}

#[test]
fn threshold_above_bound_has_no_answer() {
    assert!(library_answers("0.71", false).is_empty());
}

#[test]
fn lower_threshold_keeps_the_answer() {
    let answers = library_answers("0.5", false);
    assert!(answers.contains(&"{ R -> 4 } { W in [0.5, 0.7] }".to_string()), "{answers:?}");
}

#[test]
fn answer_limit_stops_early() {
    let p = library();
    let g = parse_goal(&format!("{QUERY}0.5"), Some(&p), &ParseOptions::new(QualDomain::U)).unwrap();
    let limits = SolveLimits {
        answers: Some(1),
        ..SolveLimits::default()
    };
    let sols = solve_qualified(&p, &QualDomain::U, &g, &limits, false).unwrap();
    assert_eq!(sols.answers.len(), 1);
    assert!(!sols.complete);
}

#[test]
fn answers_carry_valid_proofs() {
    let p = library();
    let g = parse_goal(&format!("{QUERY}0.65"), Some(&p), &ParseOptions::new(QualDomain::U)).unwrap();
    let sols = solve_qualified(&p, &QualDomain::U, &g, &SolveLimits::default(), false).unwrap();
    let a = &sols.answers[0];
    assert!(!a.flags.any());
    assert_eq!(a.proofs.len(), 5);
}

#[test]
fn empty_goal_has_one_empty_answer() {
    let p = library();
    let sols = solve(&p, &CflpGoal { atoms: Vec::new() }, &SolveLimits::default());
    assert_eq!(sols.answers.len(), 1);
    assert!(sols.answers[0].subst.is_empty());
    assert!(sols.answers[0].residual.is_empty());
    assert!(sols.complete);
}

#[test]
fn plain_narrowing_enumerates_in_rule_order() {
    let p = parse_program(
        "data nat = z | s(nat)\nadd(z, Y) --> Y\nadd(s(X), Y) --> s(add(X, Y))",
        &ParseOptions::new(QualDomain::U),
    )
    .unwrap();
    let g = parse_cflp_goal("add(X, Y) == s(z)", Some(&p)).unwrap();
    let limits = SolveLimits {
        depth: 4,
        ..SolveLimits::default()
    };
    let sols = solve(&p, &g, &limits);
    let shown: Vec<String> = sols.answers.iter().map(|a| a.to_string()).collect();
    assert!(!sols.complete);
    assert_eq!(shown[..2], ["{ X -> z, Y -> s(z) }", "{ X -> s(z), Y -> z }"]);
}

#[test]
fn numeric_residual_is_reported() {
    let p = parse_program("f(X) --> X + 1", &ParseOptions::new(QualDomain::U)).unwrap();
    let g = parse_cflp_goal("f(X) > 3", Some(&p)).unwrap();
    let sols = solve(&p, &g, &SolveLimits::default());
    assert_eq!(sols.answers.len(), 1);
    assert_eq!(sols.answers[0].to_string(), "{  } { X + 1 > 3 }");
}

#[test]
fn product_domain_reports_component_intervals() {
    let dom: QualDomain = "uxu".parse().unwrap();
    let p = parse_program("g(X) -(0.9, 0.8)-> X + 1\nf(X) -(0.5, 1)-> g(X)", &ParseOptions::new(dom.clone())).unwrap();
    let g = parse_goal("f(1) == R # W | W >= (0.4, 0.7)", Some(&p), &ParseOptions::new(dom.clone())).unwrap();
    let sols = solve_qualified(&p, &dom, &g, &SolveLimits::default(), false).unwrap();
    assert_eq!(sols.answers[0].to_string(), "{ R -> 2 } { W in ([0.4, 0.45], [0.7, 0.8]) }");
}
