//! One line per acceptance criterion. Failures are reported, not raised.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use qcflp::oracle::{default_universe, mutation_check, run_oracle, OracleConfig};
use qcflp::runtime::{solve_qualified, upper_bounds, SolveLimits};
use qcflp::semantics::{entailment_checks, qc_entails};
use qcflp::syntax::{parse_expr, parse_goal, parse_program, parse_statement, print_program, ParseOptions};
use qcflp::transform::{primed, transform_program};
use qcflp::{QualDomain, Var};
use rand::rngs::StdRng;
use rand::SeedableRng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn library_goal() -> Check {
    let start = Instant::now();
    let p = parse_program(LIBRARY, &ParseOptions::new(QualDomain::U)).map_err(|e| e.to_string())?;
    let g = parse_goal(
        "search(\"German\", \"Essay\", intermediate) == R # W | W >= 0.65",
        Some(&p),
        &ParseOptions::new(QualDomain::U),
    )
    .map_err(|e| e.to_string())?;
    let sols = solve_qualified(&p, &QualDomain::U, &g, &SolveLimits::default(), false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let first = sols.answers.first().ok_or("no answer")?;
    let r = first.subst.get(&Var::new("R")).map(|e| e.to_string());
    ensure(r.as_deref() == Some("4"), || format!("first answer {first}"))?;
    let i = first.qual[0].1[0];
    ensure(
        (i.lo - 0.65).abs() < TOL && (i.hi - 0.7).abs() < TOL && !i.lo_open && !i.hi_open,
        || format!("interval {i}"),
    )?;
    ensure(!first.flags.any(), || format!("flagged answer {first}"))?;
    ensure(elapsed.as_secs_f64() < 5.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{first} in {:.0} ms", elapsed.as_secs_f64() * 1000.0))
}

fn max_qualification(goal: &str) -> Result<f64, String> {
    let p = library();
    let g = parse_goal(goal, Some(&p), &ParseOptions::new(QualDomain::U)).map_err(|e| e.to_string())?;
    let sols = solve_qualified(&p, &QualDomain::U, &g, &SolveLimits::default(), false).map_err(|e| e.to_string())?;
    ensure(sols.complete, || format!("search for `{goal}` not exhaustive"))?;
    sols.answers
        .iter()
        .map(|a| upper_bounds(a)[&Var::new("W")][0])
        .reduce(f64::max)
        .ok_or_else(|| format!("no answer for `{goal}`"))
}

fn sub_inferences() -> Check {
    let genre = max_qualification(&format!("guessGenre({}) == \"Essay\" # W | W >= 0.5", book4()))?;
    let level = max_qualification(&format!("guessReaderLevel({}) == intermediate # W | W >= 0.5", book4()))?;
    ensure((genre - 0.7).abs() < TOL && (level - 0.8).abs() < TOL, || {
        format!("genre {genre}, reader level {level}")
    })?;
    Ok(format!("genre Essay {genre}, reader level intermediate {level}"))
}

fn axioms() -> Check {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut report = Vec::new();
    let mut failed = false;
    for (name, dom) in [("U", QualDomain::U), ("UxU", uxu())] {
        let v = axiom_suite(&dom, 1000, &mut rng);
        let mut by: BTreeMap<&str, usize> = BTreeMap::new();
        for (axiom, ..) in &v {
            *by.entry(axiom).or_default() += 1;
        }
        if let Some((axiom, d, e, _)) = v.first() {
            failed = true;
            report.push(format!("{name}: {} violations {by:?}, e.g. {axiom} at d = {d}, e = {e}", v.len()));
        } else {
            report.push(format!("{name}: 1000 samples, 0 violations"));
        }
    }
    if failed {
        Err(report.join("; "))
    } else {
        Ok(report.join("; "))
    }
}

fn entailment() -> Check {
    let phi = parse_statement("(f(X:Xs) -> Xs) # 0.8 <== X*X /= 0", None).map_err(|e| e.to_string())?;
    let phi2 = parse_statement("(f(A:(B:[])) -> _|_ : _|_) # 0.7 <== A < 0", None).map_err(|e| e.to_string())?;
    let sigma = qc_entails(&QualDomain::U, &phi, &phi2).ok_or("not entailed")?;
    let want_x = parse_expr("A").unwrap();
    let want_xs = parse_expr("B : _|_").unwrap();
    ensure(
        sigma.get(&Var::new("X")) == Some(&want_x) && sigma.get(&Var::new("Xs")) == Some(&want_xs),
        || format!("sigma {sigma}"),
    )?;
    let c = entailment_checks(&QualDomain::U, &phi, &phi2, &sigma);
    ensure(c.all(), || format!("{c:?}"))?;
    Ok(format!("sigma = {sigma}; constraints, 0.8 >= 0.7 and orderings hold"))
}

const PROGRAMS: [&str; 4] = [
    "f --> true",
    "g -0.9-> true",
    HALF,
    "data nat = z | s(nat)\nnot(true) --> false\nnot(false) -0.7-> true\nev(z) -0.9-> true\nev(s(X)) -0.8-> not(ev(X))",
];

fn oracle() -> Check {
    let (mut matches, mut inconclusive, mut mismatches) = (0, 0, 0);
    let (mut detected, mut implied, mut survived) = (0, 0, Vec::new());
    for src in PROGRAMS {
        let p = parse_program(src, &ParseOptions::new(QualDomain::U)).map_err(|e| e.to_string())?;
        let universe = default_universe(&p, 20);
        ensure(p.rules.len() <= 5 && universe.len() <= 20, || format!("program too large: {src}"))?;
        let cfg = OracleConfig::new(6, universe);
        let r = run_oracle(&p, &QualDomain::U, &cfg).map_err(|e| e.to_string())?;
        matches += r.matches();
        inconclusive += r.inconclusive();
        mismatches += r.mismatches();
        let m = mutation_check(&p, &QualDomain::U, &cfg).map_err(|e| e.to_string())?;
        detected += m.detected.len();
        implied += m.implied.len();
        survived.extend(m.survived);
    }
    let summary = format!(
        "{} programs: {matches} match, {mismatches} mismatch, {inconclusive} inconclusive; mutants: {detected} detected, {implied} undetected but implied by the remaining conditions, {} undetected otherwise",
        PROGRAMS.len(),
        survived.len()
    );
    if mismatches == 0 && implied == 0 && survived.is_empty() {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn transformation() -> Check {
    let p = library();
    let (t, _) = transform_program(&p, &QualDomain::U, 0).map_err(|e| e.to_string())?;
    ensure(t.program.rules.len() == 24, || format!("{} rules", t.program.rules.len()))?;
    let after = t.program.signature().defined;
    for (f, n) in &p.signature().defined {
        ensure(after.get(&primed(f)) == Some(&(n + 1)), || format!("arity of {f}"))?;
    }
    let mut seen = BTreeSet::new();
    for r in &t.program.rules {
        let own: BTreeSet<Var> = r.vars().into_iter().filter(|v| v.as_str().starts_with("$W")).collect();
        for v in own {
            ensure(seen.insert(v.clone()), || format!("{v} reused"))?;
        }
    }
    let again = transform_program(&p, &QualDomain::U, 0).map_err(|e| e.to_string())?.0;
    let text = print_program(&t.program);
    ensure(text == print_program(&again.program), || "output differs between runs".into())?;
    Ok(format!(
        "24 rules, {} defined symbols with arity +1, {} fresh variables, identical output",
        after.len(),
        seen.len()
    ))
}

fn closure() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut checked, mut drawn) = (0, 0);
    while checked < 100 {
        drawn += 1;
        ensure(drawn <= 1000, || format!("only {checked} triples with answers"))?;
        match closure_triple(&mut rng)? {
            Triple::Checked { .. } => checked += 1,
            Triple::Empty => {}
        }
    }
    Ok(format!("100 triples ({drawn} programs drawn)"))
}

fn certificates_round_trip() -> Check {
    let certs = certificates();
    for (p, cert) in &certs {
        ensure(accepted(p, cert), || format!("emitted certificate rejected:\n{cert}"))?;
    }
    let mut rng = StdRng::seed_from_u64(99);
    let kinds = [Tamper::Qualification, Tamper::Rule, Tamper::Theta];
    let mut done = 0;
    let mut attempts = 0;
    while done < 100 {
        attempts += 1;
        ensure(attempts <= 1000, || format!("only {done} tamperings applied"))?;
        let (p, cert) = &certs[attempts % certs.len()];
        let kind = kinds[attempts % kinds.len()];
        let Some(bad) = tamper(p, cert, kind, &mut rng) else { continue };
        ensure(!accepted(p, &bad), || format!("{kind:?} tampering accepted:\n{bad}"))?;
        done += 1;
    }
    Ok(format!("{} certificates re-checked, 100 tamperings rejected", certs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("library goal", library_goal),
        ("sub-inference qualifications", sub_inferences),
        ("qualification domain axioms", axioms),
        ("entailment example", entailment),
        ("oracle and mutations", oracle),
        ("transformation structure", transformation),
        ("downward closure", closure),
        ("proof round trip", certificates_round_trip),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("acceptance {}: PASS {name}: {detail}", i + 1);
            }
            Err(detail) => println!("acceptance {}: FAIL {name}: {detail}", i + 1),
        }
    }
    println!("acceptance: {passed} of {} criteria pass", criteria.len());
}
