#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use qcflp::runtime::{solve_qualified, upper_bounds, SolveLimits};
use qcflp::semantics::{check_certificate, holds, write_certificate, HoldsVerdict, ProofTree, QcStatement, SearchLimits};
use qcflp::syntax::{parse_goal, parse_program, parse_statement, ParseOptions};
use qcflp::{Expr, Program, QualDomain, QualValue, Var};

pub const LIBRARY: &str = include_str!("../data/library.qcflp");
pub const TOL: f64 = 1e-9;

pub fn library() -> Program {
    parse_program(LIBRARY, &ParseOptions::new(QualDomain::U)).unwrap()
}

pub fn book4() -> &'static str {
    r#"book(4, "Beim Hauten der Zwiebel", "Gunter Grass", "German", "Biography", medium, 432)"#
}

pub fn uxu() -> QualDomain {
    "uxu".parse().unwrap()
}

// ---- qualification domain axioms ----

pub type Q = QualValue;

pub fn sample_component(rng: &mut StdRng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..=1.0),
    }
}

pub fn sample(dom: &QualDomain, rng: &mut StdRng) -> Q {
    let comps: Vec<f64> = (0..dom.width()).map(|_| sample_component(rng)).collect();
    dom.from_components(&comps).unwrap()
}

/// Names of the axioms violated by one sample triple.
pub fn axiom_violations(dom: &QualDomain, d: &Q, e: &Q, f: &Q) -> Vec<&'static str> {
    let leq = |a: &Q, b: &Q| dom.leq_approx(a, b, TOL);
    let eq = |a: &Q, b: &Q| dom.approx_eq(a, b, TOL);
    let glb = |a: &Q, b: &Q| dom.glb(a, b).unwrap();
    let lub = |a: &Q, b: &Q| dom.lub(a, b).unwrap();
    let att = |a: &Q, b: &Q| dom.attenuate(a, b).unwrap();
    let (bot, top) = dom.extremes::<f64>();
    let mut out = Vec::new();
    let mut check = |name, ok: bool| {
        if !ok {
            out.push(name);
        }
    };
    check("reflexive", leq(d, d));
    check("antisymmetric", !(leq(d, e) && leq(e, d)) || eq(d, e));
    check("transitive", !(leq(d, e) && leq(e, f)) || leq(d, f));
    check("extremes", leq(&bot, d) && leq(d, &top));
    let m = glb(d, e);
    check("glb", leq(&m, d) && leq(&m, e) && (!(leq(f, d) && leq(f, e)) || leq(f, &m)));
    let j = lub(d, e);
    check("lub", leq(d, &j) && leq(e, &j) && (!(leq(d, f) && leq(e, f)) || leq(&j, f)));
    check("associative", eq(&att(d, &att(e, f)), &att(&att(d, e), f)));
    check("commutative", eq(&att(d, e), &att(e, d)));
    check("monotonic", !leq(d, e) || leq(&att(d, f), &att(e, f)));
    check("identity", eq(&att(d, &top), d));
    let inner = |x: &Q| !eq(x, &bot) && !eq(x, &top);
    check(
        "strict",
        !(inner(d) && inner(e)) || (leq(&att(d, e), e) && !eq(&att(d, e), e)),
    );
    check("distributive", eq(&att(d, &glb(e, f)), &glb(&att(d, e), &att(d, f))));
    check("below", leq(&att(d, e), e));
    check("absorbing", eq(&att(d, &bot), &bot));
    out
}

/// Runs `n` seeded samples and returns every violation found.
pub fn axiom_suite(dom: &QualDomain, n: usize, rng: &mut StdRng) -> Vec<(&'static str, Q, Q, Q)> {
    let mut out = Vec::new();
    for _ in 0..n {
        let (d, e, f) = (sample(dom, rng), sample(dom, rng), sample(dom, rng));
        for name in axiom_violations(dom, &d, &e, &f) {
            out.push((name, d.clone(), e.clone(), f.clone()));
        }
    }
    out
}

// ---- downward closure ----

const CTORS: [&str; 3] = ["a", "b", "c"];

/// A random acyclic program over `data t = a | b | c` with functions
/// `f0 .. f{n-1}`, each calling only lower-numbered ones.
pub fn random_program(rng: &mut StdRng) -> (String, usize) {
    let n = rng.gen_range(1..=4);
    let mut src = String::from("data t = a | b | c\n");
    for i in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            let alpha = (rng.gen_range(50..=100) as f64) / 100.0;
            let arrow = if alpha >= 1.0 { "-->".to_string() } else { format!("-{alpha}->") };
            let k = CTORS.choose(rng).unwrap();
            let rhs = if i > 0 && rng.gen_bool(0.5) {
                format!("f{}", rng.gen_range(0..i))
            } else {
                k.to_string()
            };
            let cond = if i > 0 && rng.gen_bool(0.4) {
                format!(" <== f{} == {}", rng.gen_range(0..i), CTORS.choose(rng).unwrap())
            } else {
                String::new()
            };
            src.push_str(&format!("f{i} {arrow} {rhs}{cond}\n"));
        }
    }
    (src, n - 1)
}

fn best_for(p: &Program, goal: &str) -> Result<Vec<(String, f64)>, String> {
    let g = parse_goal(goal, Some(p), &ParseOptions::new(QualDomain::U)).map_err(|e| e.to_string())?;
    let sols = solve_qualified(p, &QualDomain::U, &g, &SolveLimits::default(), false).map_err(|e| e.to_string())?;
    if !sols.complete {
        return Err(format!("search for `{goal}` was not exhaustive"));
    }
    Ok(sols
        .answers
        .iter()
        .map(|a| {
            let h = upper_bounds(a).get(&Var::new("W")).map_or(f64::NAN, |v| v[0]);
            let r = a.subst.get(&Var::new("R")).map_or("-".to_string(), Expr::to_string);
            (r, h)
        })
        .collect())
}

pub enum Triple {
    /// The goal had no answer to start from.
    Empty,
    Checked { program: String, value: String, h: f64 },
}

/// Draws one (program, goal, answer) triple and checks downward closure on
/// it: thresholds `h` and `h/2` succeed, `h + 0.01` fails when `h < 1`.
pub fn closure_triple(rng: &mut StdRng) -> Result<Triple, String> {
    let (src, top) = random_program(rng);
    let p = parse_program(&src, &ParseOptions::new(QualDomain::U)).map_err(|e| format!("{e}\n{src}"))?;
    let answers = best_for(&p, &format!("f{top} == R # W"))?;
    let Some((value, _)) = answers.choose(rng).cloned() else {
        return Ok(Triple::Empty);
    };
    let h = answers
        .iter()
        .filter(|(r, _)| *r == value)
        .map(|(_, h)| *h)
        .fold(f64::NEG_INFINITY, f64::max);
    let at = |t: f64| best_for(&p, &format!("f{top} == {value} # W | W >= {t}"));
    for t in [h, h / 2.0] {
        if at(t)?.is_empty() {
            return Err(format!("threshold {t} failed (h = {h})\n{src}"));
        }
    }
    if h < 1.0 {
        let t = (h + 0.01).min(1.0);
        if !at(t)?.is_empty() {
            return Err(format!("threshold {t} succeeded (h = {h})\n{src}"));
        }
    }
    Ok(Triple::Checked { program: src, value, h })
}

// ---- certificates ----

pub const HALF: &str = "data nat = z | s(nat)\nhalf(z) -0.9-> z\nhalf(s(z)) -0.8-> z\nhalf(s(s(X))) -0.9-> s(half(X))\n";

/// Certificates for a few derivable statements, as emitted by `prove`.
pub fn certificates() -> Vec<(Program, String)> {
    let half = parse_program(HALF, &ParseOptions::new(QualDomain::U)).unwrap();
    let lib = library();
    let cases = [
        (half.clone(), "(half(s(s(s(s(z))))) -> s(s(z))) # 0.729".to_string()),
        (half.clone(), "(half(s(s(s(z)))) -> s(z)) # 0.5".to_string()),
        (lib.clone(), format!(r#"(guessGenre({}) -> "Essay") # 0.7"#, book4())),
        (lib, format!("(guessReaderLevel({}) -> intermediate) # 0.8", book4())),
    ];
    cases
        .into_iter()
        .map(|(p, src)| {
            let s = parse_statement(&src, Some(&p)).unwrap();
            match holds(&p, &QualDomain::U, &s, SearchLimits::default()) {
                HoldsVerdict::Derivable(tree) => {
                    let cert = write_certificate(&s, &tree);
                    (p, cert)
                }
                v => panic!("{src}: {v:?}"),
            }
        })
        .collect()
}

pub fn read(p: &Program, cert: &str) -> (QcStatement, ProofTree) {
    qcflp::semantics::read_certificate(p, cert).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub enum Tamper {
    Qualification,
    Rule,
    Theta,
}

/// Applies one random tampering of the given kind; `None` when the tree
/// has no node it applies to.
pub fn tamper(p: &Program, cert: &str, kind: Tamper, rng: &mut StdRng) -> Option<String> {
    let (mut stmt, mut tree) = read(p, cert);
    let n = tree.size();
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let node = tree.nodes()[i];
            match kind {
                Tamper::Qualification => node.conclusion.qual.is_some(),
                Tamper::Rule => node.rule.is_some(),
                Tamper::Theta => !node.theta.is_empty(),
            }
        })
        .collect();
    let &i = candidates.choose(rng)?;
    let node = tree.node_mut(i).unwrap();
    match kind {
        Tamper::Qualification => {
            let Some(QualValue::Real(d)) = node.conclusion.qual.clone() else {
                return None;
            };
            let delta = rng.gen_range(0.01..0.3) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let mut nd = d + delta;
            if !(nd > 0.0 && nd <= 1.0) {
                nd = d - delta;
            }
            if !(nd > 0.0 && nd <= 1.0) {
                nd = d / 2.0;
            }
            node.conclusion.qual = Some(QualValue::Real(nd));
            if i == 0 {
                stmt.qual = Some(QualValue::Real(nd));
            }
        }
        Tamper::Rule => {
            let r = node.rule.unwrap();
            let others: Vec<usize> = (0..p.rules.len() + 2).filter(|&k| k != r).collect();
            node.rule = Some(*others.choose(rng).unwrap());
        }
        Tamper::Theta => {
            let vars: Vec<Var> = node.theta.iter().map(|(v, _)| v.clone()).collect();
            let v = vars.choose(rng).unwrap().clone();
            let old = node.theta.get(&v).unwrap().clone();
            let new = [Expr::Num(rng.gen_range(1000..2000) as f64), Expr::app("zz", Vec::new()), Expr::Bottom]
                .into_iter()
                .find(|e| *e != old)
                .unwrap();
            node.theta.insert(v, new);
        }
    }
    let out = write_certificate(&stmt, &tree);
    (out != cert).then_some(out)
}

pub fn accepted(p: &Program, cert: &str) -> bool {
    check_certificate(p, &QualDomain::U, cert).is_valid()
}
