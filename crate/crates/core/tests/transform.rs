use std::collections::BTreeMap;

use qcflp::syntax::{parse_goal, parse_program, print_program, ParseOptions};
use qcflp::transform::{primed, simplify_goal, simplify_program, transform_goal, transform_program};
use qcflp::{Program, QualDomain, Var};

const LIBRARY: &str = include_str!("data/library.qcflp");
const GOAL: &str = "search(\"German\", \"Essay\", intermediate) == R # W | W >= 0.65";

fn library() -> Program {
    parse_program(LIBRARY, &ParseOptions::new(QualDomain::U)).unwrap()
}

fn introduced(vars: impl IntoIterator<Item = Var>) -> Vec<Var> {
    vars.into_iter().filter(|v| v.as_str().starts_with("$W")).collect()
}

#[test]
fn library_translation_keeps_rule_count() {
    let (t, _) = transform_program(&library(), &QualDomain::U, 0).unwrap();
    assert_eq!(t.program.rules.len(), 24);
    assert_eq!(t.map.len(), 24);
}

#[test]
fn defined_arities_grow_by_one() {
    let p = library();
    let (t, _) = transform_program(&p, &QualDomain::U, 0).unwrap();
    let before = p.signature().defined;
    let after = t.program.signature().defined;
    assert_eq!(before.len(), after.len());
    for (f, n) in &before {
        assert_eq!(after.get(&primed(f)), Some(&(n + 1)), "{f}");
    }
    assert_eq!(p.signature().ctors, t.program.signature().ctors);
}

#[test]
fn introduced_variables_are_fresh_across_rules() {
    let (t, _) = transform_program(&library(), &QualDomain::U, 0).unwrap();
    let mut owner: BTreeMap<Var, usize> = BTreeMap::new();
    for (i, r) in t.program.rules.iter().enumerate() {
        for v in introduced(r.vars()) {
            if let Some(j) = owner.insert(v.clone(), i) {
                assert_eq!(i, j, "{v} shared by rules {j} and {i}");
            }
        }
    }
    let total: usize = t.map.iter().map(|m| 1 + m.introduced.len()).sum();
    assert_eq!(owner.len(), total);
    for m in &t.map {
        assert_eq!(owner.get(&m.head_var), Some(&m.target));
    }
}

#[test]
fn goal_variables_continue_the_supply() {
    let p = library();
    let (t, tr) = transform_program(&p, &QualDomain::U, 0).unwrap();
    let g = parse_goal(GOAL, Some(&p), &ParseOptions::new(QualDomain::U)).unwrap();
    let cg = transform_goal(&g, &p, &QualDomain::U, Some(&tr), 0);
    let in_program: Vec<Var> = t.program.rules.iter().flat_map(|r| introduced(r.vars())).collect();
    for v in introduced(cg.vars()) {
        assert!(!in_program.contains(&v), "{v}");
    }
}

#[test]
fn output_is_deterministic_per_seed() {
    let p = library();
    let print = |seed| print_program(&transform_program(&p, &QualDomain::U, seed).unwrap().0.program);
    assert_eq!(print(0), print(0));
    assert_eq!(print(7), print(7));
    assert_ne!(print(0), print(7));
}

#[test]
fn translation_reparses() {
    let (t, _) = transform_program(&library(), &QualDomain::U, 0).unwrap();
    let text = print_program(&t.program);
    let back = parse_program(&text, &ParseOptions::translated(QualDomain::U)).unwrap();
    assert_eq!(print_program(&back), text);
    assert!(parse_program(&text, &ParseOptions::new(QualDomain::U)).is_err());
}

#[test]
fn attenuated_rule_shape() {
    let p = parse_program("g -0.9-> true", &ParseOptions::new(QualDomain::U)).unwrap();
    let (t, _) = transform_program(&p, &QualDomain::U, 0).unwrap();
    assert_eq!(
        print_program(&t.program).trim(),
        "g'($W0) --> true <== qVal($W0), $W0 <= 0.9"
    );
}

#[test]
fn goal_translation_and_simplification() {
    let p = library();
    let (_, tr) = transform_program(&p, &QualDomain::U, 0).unwrap();
    let g = parse_goal(GOAL, Some(&p), &ParseOptions::new(QualDomain::U)).unwrap();
    let cg = transform_goal(&g, &p, &QualDomain::U, Some(&tr), 0);
    assert_eq!(
        cg.to_string(),
        "qVal($W47), qVal(W), W <= $W47, W >= 0.65, search'(\"German\", \"Essay\", intermediate, $W47) == R"
    );
    assert_eq!(
        simplify_goal(&cg, &QualDomain::U).to_string(),
        "qVal(W), W >= 0.65, search'(\"German\", \"Essay\", intermediate, W) == R"
    );
}

#[test]
fn simplification_only_drops_atoms() {
    let (t, _) = transform_program(&library(), &QualDomain::U, 0).unwrap();
    let s = simplify_program(&t.program, &QualDomain::U);
    assert_eq!(s.rules.len(), t.program.rules.len());
    for (a, b) in t.program.rules.iter().zip(&s.rules) {
        assert!(b.conds.len() <= a.conds.len());
        assert_eq!(a.head, b.head);
    }
}

#[test]
fn primed_name_clash_is_refused() {
    let p = Program {
        data: Vec::new(),
        rules: parse_program("f --> true\ng --> false", &ParseOptions::new(QualDomain::U))
            .unwrap()
            .rules
            .into_iter()
            .map(|mut r| {
                if r.head.as_str() == "g" {
                    r.head = primed(&qcflp::Symbol::new("f"));
                }
                r
            })
            .collect(),
    };
    assert!(transform_program(&p, &QualDomain::U, 0).is_err());
}
