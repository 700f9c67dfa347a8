//! Cross-checks the translate-then-solve pipeline against the bounded
//! fixpoint semantics of the source program.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{QcflpError, Result};
use crate::prim;
use crate::program::{CflpGoal, Goal, GoalPart, Program};
use crate::qual::{QualDomain, QualValue};
use crate::runtime::{solve, solve_translated, SolveLimits, Solutions};
use crate::semantics::fixpoint::{bounded_lfp, Interpretation, LfpConfig};
use crate::solver::TOL;
use crate::term::{Atom, Expr, Symbol, Var};
use crate::transform::{primed, transform_goal, transform_program};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Fixpoint iterations, also used as the runtime nesting bound.
    pub depth: usize,
    /// Ground terms used as call arguments and expected results.
    pub universe: Vec<Expr>,
    pub max_rules: usize,
    pub max_universe: usize,
    /// Step budget of each fixpoint computation and each goal.
    pub steps: usize,
}

impl OracleConfig {
    pub fn new(depth: usize, universe: Vec<Expr>) -> Self {
        OracleConfig {
            depth,
            universe,
            max_rules: 10,
            max_universe: 20,
            steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Match,
    Mismatch(String),
    /// A difference that a deeper bound might remove.
    Inconclusive(String),
}

/// Results of one call with their maximal qualifications.
pub type Results = Vec<(Expr, Vec<QualValue<f64>>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub call: Expr,
    /// Qualification passed directly to the translated function; such calls
    /// must have no result.
    pub probe: Option<Expr>,
    pub expected: Results,
    pub actual: Results,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub comparisons: Vec<Comparison>,
    /// A step budget ran out on either side.
    pub partial: bool,
}

impl OracleReport {
    pub fn matches(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Match))
    }

    pub fn mismatches(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Mismatch(_)))
    }

    pub fn inconclusive(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Inconclusive(_)))
    }

    fn count(&self, f: impl Fn(&Outcome) -> bool) -> usize {
        self.comparisons.iter().filter(|c| f(&c.outcome)).count()
    }
}

fn show_results(rs: &Results) -> String {
    if rs.is_empty() {
        return "nothing".into();
    }
    rs.iter()
        .map(|(r, qs)| {
            let qs: Vec<String> = qs.iter().map(QualValue::to_string).collect();
            if qs.is_empty() {
                r.to_string()
            } else {
                format!("{r} # {}", qs.join(" | "))
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match &self.outcome {
            Outcome::Match => "match",
            Outcome::Mismatch(_) => "MISMATCH",
            Outcome::Inconclusive(_) => "inconclusive",
        };
        write!(f, "{tag}\t{}", self.call)?;
        if let Some(p) = &self.probe {
            write!(f, " @ {p}")?;
        }
        write!(f, "\texpected {}\tactual {}", show_results(&self.expected), show_results(&self.actual))?;
        match &self.outcome {
            Outcome::Match => Ok(()),
            Outcome::Mismatch(why) | Outcome::Inconclusive(why) => write!(f, "\t{why}"),
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.comparisons {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} match, {} mismatch, {} inconclusive{}",
            self.matches(),
            self.mismatches(),
            self.inconclusive(),
            if self.partial { " (partial: budget exhausted)" } else { "" }
        )
    }
}

fn product(universe: &[Expr], n: usize) -> Vec<Vec<Expr>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                universe.iter().map(move |u| {
                    let mut t = prefix.clone();
                    t.push(u.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Ground terms built from the program's constants and constructors, up to
/// `max` terms. Declared field types are respected; constructors of other
/// types take constants only.
pub fn default_universe(program: &Program, max: usize) -> Vec<Expr> {
    let sig = program.signature();
    let mut out: Vec<Expr> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |e: Expr, out: &mut Vec<Expr>| {
        if out.len() < max && seen.insert(e.clone()) {
            out.push(e);
        }
    };
    let mut nums = BTreeSet::new();
    for r in &program.rules {
        let mut exprs: Vec<&Expr> = r.params.iter().chain(std::iter::once(&r.rhs)).collect();
        exprs.extend(r.conds.iter().flat_map(|a| a.args.iter().chain(std::iter::once(&a.result))));
        for e in exprs {
            collect_nums(e, &mut nums);
        }
    }
    for (c, &n) in &sig.ctors {
        if n == 0 {
            push(Expr::App(c.clone(), Vec::new()), &mut out);
        }
    }
    for x in nums {
        push(Expr::num(f64::from_bits(x)), &mut out);
    }
    let base = out.clone();
    let type_of = |c: &Symbol| -> Option<&str> {
        program
            .data
            .iter()
            .find(|d| d.ctors.iter().any(|(k, _)| k == c))
            .map(|d| d.name.as_str())
    };
    let declared: Vec<&(Symbol, Vec<String>)> = program.data.iter().flat_map(|d| d.ctors.iter()).filter(|(_, ts)| !ts.is_empty()).collect();
    for (c, &n) in &sig.ctors {
        if n > 0 && n <= 2 && !declared.iter().any(|(k, _)| k == c) {
            for args in product(&base, n) {
                push(Expr::App(c.clone(), args), &mut out);
            }
        }
    }
    let mut layers = 1;
    loop {
        let before = out.len();
        let layer = out.clone();
        for (c, tys) in &declared {
            let choices: Vec<Vec<Expr>> = tys
                .iter()
                .map(|ty| {
                    let typed: Vec<Expr> = layer
                        .iter()
                        .filter(|e| match e {
                            Expr::App(k, _) => type_of(k) == Some(ty.as_str()),
                            _ => false,
                        })
                        .cloned()
                        .collect();
                    if program.data.iter().any(|d| d.name.as_str() == ty) {
                        typed
                    } else {
                        base.clone()
                    }
                })
                .collect();
            for args in choices.iter().fold(vec![Vec::new()], |acc, opts| {
                acc.into_iter()
                    .flat_map(|prefix| {
                        opts.iter().map(move |o| {
                            let mut t: Vec<Expr> = prefix.clone();
                            t.push(o.clone());
                            t
                        })
                    })
                    .collect()
            }) {
                push(Expr::App(c.clone(), args), &mut out);
            }
        }
        if out.len() == before || out.len() >= max || layers == MAX_LAYERS {
            return out;
        }
        layers += 1;
    }
}

const MAX_LAYERS: usize = 4;

fn collect_nums(e: &Expr, out: &mut BTreeSet<u64>) {
    match e {
        Expr::Num(x) => {
            out.insert(x.to_bits());
        }
        Expr::App(_, args) => args.iter().for_each(|a| collect_nums(a, out)),
        _ => {}
    }
}

fn check_size(program: &Program, cfg: &OracleConfig) -> Result<()> {
    if program.rules.len() > cfg.max_rules {
        return Err(QcflpError::Usage(format!(
            "the oracle accepts at most {} rules, the program has {}",
            cfg.max_rules,
            program.rules.len()
        )));
    }
    if cfg.universe.len() > cfg.max_universe {
        return Err(QcflpError::Usage(format!(
            "the oracle accepts at most {} universe terms, got {}",
            cfg.max_universe,
            cfg.universe.len()
        )));
    }
    if cfg.depth == 0 {
        return Err(QcflpError::Usage("the oracle depth must be positive".into()));
    }
    Ok(())
}

/// Compares the translation of `program` against its bounded fixpoint.
pub fn run_oracle(program: &Program, dom: &QualDomain, cfg: &OracleConfig) -> Result<OracleReport> {
    check_size(program, cfg)?;
    let (t, _) = transform_program(program, dom, 0)?;
    let lfp = Fixpoints::new(program, dom, cfg);
    Ok(compare(program, &t.program, dom, cfg, &lfp))
}

/// The iterate at the configured depth and the one before it.
pub struct Fixpoints {
    pub last: Interpretation,
    pub previous: Interpretation,
}

impl Fixpoints {
    pub fn new(program: &Program, dom: &QualDomain, cfg: &OracleConfig) -> Self {
        let at = |depth| LfpConfig {
            budget: cfg.steps,
            ..LfpConfig::new(depth, cfg.universe.clone())
        };
        Fixpoints {
            last: bounded_lfp(program, dom, &at(cfg.depth)),
            previous: bounded_lfp(program, dom, &at(cfg.depth - 1)),
        }
    }

    /// The facts about `call` did not change in the last iteration.
    fn stable(&self, dom: &QualDomain, call: &Expr) -> bool {
        if self.last.partial || self.previous.partial {
            return false;
        }
        if self.last.saturated {
            return true;
        }
        let (a, b) = (self.last.results(call), self.previous.results(call));
        a.len() == b.len()
            && a.iter().zip(&b).all(|((r, qs), (s, ps))| r == s && covered(dom, qs, ps) && covered(dom, ps, qs))
    }
}

fn limits(cfg: &OracleConfig) -> SolveLimits {
    SolveLimits {
        depth: cfg.depth,
        deepen: false,
        steps: cfg.steps,
        answers: None,
    }
}

/// Compares a translated program, possibly altered, against the fixpoint
/// of the source program.
pub fn compare(program: &Program, translated: &Program, dom: &QualDomain, cfg: &OracleConfig, lfp: &Fixpoints) -> OracleReport {
    let mut report = OracleReport {
        comparisons: Vec::new(),
        partial: lfp.last.partial || lfp.previous.partial,
    };
    let universe: BTreeSet<Expr> = cfg.universe.iter().filter(|e| e.is_total()).cloned().collect();
    let args: Vec<Expr> = universe.iter().cloned().collect();
    let r = Var::new("R");
    let w = Var::new("W");
    for (f, &n) in &program.signature().defined {
        for tuple in product(&args, n) {
            let call = Expr::App(f.clone(), tuple.clone());
            let goal = Goal {
                parts: vec![GoalPart {
                    atom: Atom::strict_eq(call.clone(), Expr::Var(r.clone())),
                    qvar: w.clone(),
                    threshold: None,
                }],
            };
            let cgoal = transform_goal(&goal, program, dom, None, 0);
            let sols = solve_translated(translated, &cgoal, dom, &goal, &limits(cfg));
            report.partial |= sols.note.as_deref() == Some("step budget exhausted");
            let expected: Results = lfp
                .last
                .results(&call)
                .into_iter()
                .filter(|(res, _)| universe.contains(res))
                .collect();
            let (actual, outcome) = judge(dom, &r, &sols, &expected, &universe, lfp.stable(dom, &call));
            report.comparisons.push(Comparison {
                call: call.clone(),
                probe: None,
                expected,
                actual,
                outcome,
            });
            for probe in probes(dom) {
                report.comparisons.push(run_probe(f, &tuple, &probe, dom, translated, cfg, &r));
            }
        }
    }
    report
}

/// Qualification values outside the domain, one component at a time.
fn probes(dom: &QualDomain) -> Vec<Vec<f64>> {
    let n = dom.width();
    let mut out = Vec::new();
    for bad in [0.0, 2.0] {
        for i in 0..n {
            let mut v = vec![1e-6; n];
            v[i] = bad;
            out.push(v);
        }
    }
    out
}

fn run_probe(
    f: &Symbol,
    tuple: &[Expr],
    probe: &[f64],
    dom: &QualDomain,
    translated: &Program,
    cfg: &OracleConfig,
    r: &Var,
) -> Comparison {
    let q = match probe {
        [x] => Expr::num(*x),
        xs => Expr::app(crate::transform::QPAIR, xs.iter().map(|&x| Expr::num(x)).collect()),
    };
    let mut args = tuple.to_vec();
    args.push(q.clone());
    let goal = CflpGoal {
        atoms: vec![Atom::strict_eq(Expr::App(primed(f), args), Expr::Var(r.clone()))],
    };
    let sols = solve(translated, &goal, &limits(cfg));
    let actual: Results = sols
        .answers
        .iter()
        .map(|a| (a.subst.get(r).cloned().unwrap_or(Expr::Bottom), Vec::new()))
        .collect();
    let outcome = if actual.is_empty() {
        Outcome::Match
    } else {
        Outcome::Mismatch(format!("a qualification outside {dom} produced a result"))
    };
    Comparison {
        call: Expr::App(f.clone(), tuple.to_vec()),
        probe: Some(q),
        expected: Vec::new(),
        actual,
        outcome,
    }
}

/// Soundness problems are definite once the fixpoint facts of the call are
/// stable; completeness problems once the runtime search was exhaustive.
fn judge(
    dom: &QualDomain,
    r: &Var,
    sols: &Solutions,
    expected: &Results,
    universe: &BTreeSet<Expr>,
    stable: bool,
) -> (Results, Outcome) {
    let mut actual: Results = Vec::new();
    let mut definite = Vec::new();
    let mut unsound = Vec::new();
    let mut missing = Vec::new();
    let mut exhaustive = sols.complete;
    for a in &sols.answers {
        exhaustive &= !a.flags.any();
        let Some(res) = a.subst.get(r) else {
            definite.push("an answer leaves the result unbound".to_string());
            continue;
        };
        if !universe.contains(res) {
            continue;
        }
        let Some((_, boxes)) = a.qual.first() else {
            continue;
        };
        if boxes.iter().any(|b| b.lo.abs() > TOL || !b.lo_open) {
            definite.push(format!("qualification of `{res}` is not bounded below by an open 0"));
        }
        let his: Vec<f64> = boxes.iter().map(|b| b.hi).collect();
        let Some(hi) = dom.from_components(&his) else {
            definite.push(format!("qualification of `{res}` is outside the domain"));
            continue;
        };
        match actual.iter_mut().find(|(x, _)| x == res) {
            Some((_, qs)) => add_maximal(dom, qs, hi),
            None => actual.push((res.clone(), vec![hi])),
        }
    }
    actual.sort_by(|a, b| a.0.cmp(&b.0));
    for (res, got) in &actual {
        match expected.iter().find(|(x, _)| x == res) {
            None => unsound.push(format!("`{res}` is computed but not a fact")),
            Some((_, qs)) if !covered(dom, got, qs) => unsound.push(format!("`{res}` is computed with a qualification above the facts")),
            _ => {}
        }
    }
    for (res, qs) in expected {
        match actual.iter().find(|(x, _)| x == res) {
            None => missing.push(format!("`{res}` is not computed")),
            Some((_, got)) if !covered(dom, qs, got) => missing.push(format!("`{res}` is computed with a qualification below the facts")),
            _ => {}
        }
    }
    let mut sure = definite;
    let mut unsure = Vec::new();
    if stable { &mut sure } else { &mut unsure }.extend(unsound);
    if exhaustive { &mut sure } else { &mut unsure }.extend(missing);
    let outcome = if !sure.is_empty() {
        sure.extend(unsure);
        Outcome::Mismatch(sure.join("; "))
    } else if !unsure.is_empty() {
        Outcome::Inconclusive(unsure.join("; "))
    } else {
        Outcome::Match
    };
    (actual, outcome)
}

/// Every qualification in `a` lies below one in `b`.
fn covered(dom: &QualDomain, a: &[QualValue<f64>], b: &[QualValue<f64>]) -> bool {
    a.iter().all(|x| b.iter().any(|y| dom.leq_approx(x, y, TOL)))
}

fn add_maximal(dom: &QualDomain, qs: &mut Vec<QualValue<f64>>, q: QualValue<f64>) {
    if qs.iter().any(|p| dom.leq_approx(&q, p, TOL)) {
        return;
    }
    qs.retain(|p| !dom.leq_approx(p, &q, TOL));
    qs.push(q);
}

/// Qualification conditions emitted by the translation: constraints over the
/// introduced variables only.
pub fn is_qual_condition(a: &Atom) -> bool {
    let p = a.prim.as_str();
    let vars = a.vars();
    matches!(p, prim::QVAL | prim::LE | prim::GE) && !vars.is_empty() && vars.iter().all(|v| v.as_str().starts_with("$W"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    pub rule: usize,
    pub cond: usize,
    pub dropped: Atom,
    pub program: Program,
}

impl fmt::Display for Mutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} drops `{}`", self.rule + 1, self.dropped)
    }
}

/// Every translation that omits exactly one emitted qualification condition.
pub fn mutants(translated: &Program) -> Vec<Mutant> {
    let mut out = Vec::new();
    for (ri, r) in translated.rules.iter().enumerate() {
        for (ci, c) in r.conds.iter().enumerate() {
            if !is_qual_condition(c) {
                continue;
            }
            let mut p = translated.clone();
            p.rules[ri].conds.remove(ci);
            out.push(Mutant {
                rule: ri,
                cond: ci,
                dropped: c.clone(),
                program: p,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MutationReport {
    pub detected: Vec<String>,
    /// Undetected, but the dropped condition follows from the rest of the
    /// translation.
    pub implied: Vec<String>,
    pub survived: Vec<String>,
}

impl MutationReport {
    pub fn total(&self) -> usize {
        self.detected.len() + self.implied.len() + self.survived.len()
    }
}

fn qual_arg_component(arg: &Expr, v: &Var) -> Option<usize> {
    match arg {
        Expr::Var(w) if w == v => Some(0),
        Expr::App(q, xs) if q.as_str() == crate::transform::QPAIR => xs.iter().position(|x| x.as_var() == Some(v)),
        _ => None,
    }
}

fn callee_checks_qval(translated: &Program, g: &Symbol, i: usize) -> bool {
    let mut rules = translated.rules.iter().filter(|r| &r.head == g).peekable();
    rules.peek().is_some()
        && rules.all(|r| {
            let head = match r.params.last() {
                Some(Expr::Var(h)) if i == 0 => Some(h.clone()),
                Some(Expr::App(_, hs)) => hs.get(i).and_then(Expr::as_var).cloned(),
                _ => None,
            };
            head.is_some_and(|h| r.conds.iter().any(|c| c.prim.as_str() == prim::QVAL && c.args == [Expr::Var(h.clone())]))
        })
}

fn calls_with<'a>(e: &'a Expr, out: &mut Vec<(&'a Symbol, &'a Expr)>) {
    if let Expr::App(f, args) = e {
        if let Some(last) = args.last() {
            out.push((f, last));
        }
        args.iter().for_each(|a| calls_with(a, out));
    }
}

/// Whether the dropped condition of a mutant follows from what remains: a
/// duplicate, `W <= 1` next to `qVal(W)`, or `qVal(V)` for a call whose
/// rules all check `qVal` of their own qualification argument.
pub fn is_implied(translated: &Program, m: &Mutant) -> bool {
    let rest = &m.program.rules[m.rule];
    let d = &m.dropped;
    if rest.conds.contains(d) {
        return true;
    }
    let [Expr::Var(v), bound] = d.args.as_slice() else {
        return match (d.prim.as_str(), d.args.as_slice()) {
            (prim::QVAL, [Expr::Var(v)]) => qval_implied(translated, rest, v),
            _ => false,
        };
    };
    d.prim.as_str() == prim::LE
        && bound.as_num() == Some(1.0)
        && rest.conds.iter().any(|c| c.prim.as_str() == prim::QVAL && c.args == [Expr::Var(v.clone())])
}

fn qval_implied(translated: &Program, rule: &crate::program::Rule, v: &Var) -> bool {
    let mut calls = Vec::new();
    calls_with(&rule.rhs, &mut calls);
    for c in &rule.conds {
        for e in c.args.iter().chain(std::iter::once(&c.result)) {
            calls_with(e, &mut calls);
        }
    }
    calls
        .into_iter()
        .any(|(g, arg)| qual_arg_component(arg, v).is_some_and(|i| callee_checks_qval(translated, g, i)))
}

/// Runs the oracle against every single-condition mutant of the translation.
pub fn mutation_check(program: &Program, dom: &QualDomain, cfg: &OracleConfig) -> Result<MutationReport> {
    check_size(program, cfg)?;
    let (t, _) = transform_program(program, dom, 0)?;
    let lfp = Fixpoints::new(program, dom, cfg);
    let mut report = MutationReport::default();
    for m in mutants(&t.program) {
        let r = compare(program, &m.program, dom, cfg, &lfp);
        if r.mismatches() > 0 {
            report.detected.push(m.to_string());
        } else if is_implied(&t.program, &m) {
            report.implied.push(m.to_string());
        } else {
            report.survived.push(m.to_string());
        }
    }
    Ok(report)
}
