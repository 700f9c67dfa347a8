//! Bottom-up iteration of the interpretation transformer over a finite
//! universe of ground terms.

use std::collections::{BTreeMap, BTreeSet};

use super::statement::{QcStatement, StatementBody};
use crate::prim;
use crate::program::{Program, Rule};
use crate::qual::{QualDomain, QualValue};
use crate::solver::{self, SatVerdict, TOL};
use crate::term::{info_leq, Expr, Subst, Symbol, Var};

/// A qc-fact `(f(t1,...,tn) -> t) # d` over ground terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub call: Expr,
    pub result: Expr,
    pub qual: QualValue<f64>,
}

#[derive(Debug, Clone)]
pub struct LfpConfig {
    /// Number of transformer applications.
    pub depth: usize,
    /// Ground terms allowed as call arguments and results; closed under
    /// subterms and `⊥` before use.
    pub universe: Vec<Expr>,
    /// Upper bound on elementary evaluation steps.
    pub budget: usize,
}

impl LfpConfig {
    pub fn new(depth: usize, universe: Vec<Expr>) -> Self {
        LfpConfig {
            depth,
            universe,
            budget: 2_000_000,
        }
    }
}

/// The non-trivial facts of an iterate, keeping only maximal qualifications.
#[derive(Debug, Clone, Default)]
pub struct Interpretation {
    facts: BTreeMap<Expr, BTreeMap<Expr, Vec<QualValue<f64>>>>,
    /// Iterations actually performed.
    pub iterations: usize,
    /// The step budget ran out before `depth` iterations or a fixpoint.
    pub partial: bool,
    /// A fixpoint was reached within the requested depth.
    pub saturated: bool,
}

impl Interpretation {
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for (call, results) in &self.facts {
            for (r, qs) in results {
                for q in qs {
                    out.push(Fact {
                        call: call.clone(),
                        result: r.clone(),
                        qual: q.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.facts.values().map(|rs| rs.values().map(Vec::len).sum::<usize>()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maximal qualifications recorded for exactly this call and result.
    pub fn best(&self, call: &Expr, result: &Expr) -> Vec<QualValue<f64>> {
        self.facts
            .get(call)
            .and_then(|rs| rs.get(result))
            .cloned()
            .unwrap_or_default()
    }

    /// Total results recorded for a call, with their maximal qualifications.
    pub fn results(&self, call: &Expr) -> Vec<(Expr, Vec<QualValue<f64>>)> {
        self.facts
            .get(call)
            .map(|rs| rs.iter().map(|(r, q)| (r.clone(), q.clone())).collect())
            .unwrap_or_default()
    }

    /// Membership of a ground qc-fact in the closure of the iterate: trivial,
    /// or entailed by a recorded fact.
    pub fn contains(&self, dom: &QualDomain, stmt: &QcStatement) -> bool {
        if stmt.is_trivial() {
            return true;
        }
        if !stmt.pi.is_empty() && !matches!(solver::satisfiable(&stmt.pi), SatVerdict::Sat(_)) {
            return false;
        }
        let (StatementBody::Production(Expr::App(f, args), t), Some(d)) = (&stmt.body, &stmt.qual) else {
            return false;
        };
        self.facts.iter().any(|(c, rs)| match c {
            Expr::App(g, cargs) if g == f && cargs.len() == args.len() => {
                cargs.iter().zip(args).all(|(a, b)| info_leq(a, b))
                    && rs.iter().any(|(r, qs)| {
                        info_leq(t, r) && qs.iter().any(|q| dom.leq_approx(d, q, TOL))
                    })
            }
            _ => false,
        })
    }
}

fn subterms(e: &Expr, out: &mut BTreeSet<Expr>) {
    out.insert(e.clone());
    if let Expr::App(_, args) = e {
        args.iter().for_each(|a| subterms(a, out));
    }
}

/// Adds `q` to an antichain of maximal values; returns whether it was new.
fn insert_max(dom: &QualDomain, set: &mut Vec<QualValue<f64>>, q: QualValue<f64>) -> bool {
    if set.iter().any(|x| dom.leq_approx(&q, x, TOL)) {
        return false;
    }
    set.retain(|x| !dom.leq_approx(x, &q, TOL));
    set.push(q);
    true
}

type Values = Vec<(Expr, QualValue<f64>)>;
type Combination = (Vec<Expr>, QualValue<f64>);

fn push_value(dom: &QualDomain, out: &mut Values, v: Expr, q: QualValue<f64>) {
    if out.iter().any(|(w, p)| info_leq(&v, w) && dom.leq_approx(&q, p, TOL)) {
        return;
    }
    out.retain(|(w, p)| !(info_leq(w, &v) && dom.leq_approx(p, &q, TOL)));
    out.push((v, q));
}

struct Engine<'a> {
    program: &'a Program,
    dom: &'a QualDomain,
    defined: BTreeSet<Symbol>,
    universe: Vec<Expr>,
    in_universe: BTreeSet<Expr>,
    steps: usize,
    budget: usize,
}

struct OutOfBudget;

impl Engine<'_> {
    fn tick(&mut self) -> Result<(), OutOfBudget> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(OutOfBudget)
        } else {
            Ok(())
        }
    }

    fn glb(&self, a: &QualValue<f64>, b: &QualValue<f64>) -> QualValue<f64> {
        self.dom.glb(a, b).unwrap_or_else(|_| self.dom.bottom())
    }

    /// Maximal approximations `t` with `(e -> t) # d` derivable from `prev`,
    /// always including `⊥` at `⊤`.
    fn values(&mut self, prev: &Interpretation, e: &Expr) -> Result<Values, OutOfBudget> {
        self.tick()?;
        let top = self.dom.top();
        let mut out: Values = vec![(Expr::Bottom, top.clone())];
        match e {
            Expr::Bottom => {}
            Expr::Var(_) | Expr::Num(_) => push_value(self.dom, &mut out, e.clone(), top),
            Expr::App(f, args) if self.defined.contains(f) => {
                let arg_vals = self.all_values(prev, args)?;
                let combos = self.combinations(&arg_vals, false)?;
                let calls = prev
                    .facts
                    .iter()
                    .filter(|(c, _)| matches!(c, Expr::App(g, _) if g == f));
                for (call, rs) in calls {
                    let Expr::App(_, sargs) = call else { continue };
                    let mut reach: Vec<QualValue<f64>> = Vec::new();
                    for (combo, d) in &combos {
                        if sargs.iter().zip(combo).all(|(s, v)| info_leq(s, v)) {
                            insert_max(self.dom, &mut reach, d.clone());
                        }
                    }
                    for d in &reach {
                        for (r, qs) in rs {
                            for q in qs {
                                let g = self.glb(d, q);
                                push_value(self.dom, &mut out, r.clone(), g);
                            }
                        }
                    }
                }
            }
            Expr::App(p, args) if prim::is_primitive(p.as_str()) => {
                let arg_vals = self.all_values(prev, args)?;
                for (combo, d) in self.combinations(&arg_vals, true)? {
                    if let Ok(v) = prim::eval_primitive(p, &combo) {
                        if !v.is_bottom() {
                            push_value(self.dom, &mut out, v, d);
                        }
                    }
                }
            }
            Expr::App(c, args) => {
                let arg_vals = self.all_values(prev, args)?;
                for (combo, d) in self.combinations(&arg_vals, false)? {
                    push_value(self.dom, &mut out, Expr::App(c.clone(), combo), d);
                }
            }
        }
        Ok(out)
    }

    fn all_values(&mut self, prev: &Interpretation, args: &[Expr]) -> Result<Vec<Values>, OutOfBudget> {
        args.iter().map(|a| self.values(prev, a)).collect()
    }

    fn combinations(&mut self, vals: &[Values], total: bool) -> Result<Vec<Combination>, OutOfBudget> {
        let mut acc: Vec<Combination> = vec![(Vec::new(), self.dom.top())];
        for vs in vals {
            let mut next = Vec::new();
            for (prefix, d) in &acc {
                for (v, q) in vs {
                    if total && !v.is_total() {
                        continue;
                    }
                    self.tick()?;
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    next.push((p, self.glb(d, q)));
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Best qualifications for a condition `p(e1,...,en) == v`.
    fn condition(&mut self, prev: &Interpretation, a: &crate::term::Atom) -> Result<Vec<QualValue<f64>>, OutOfBudget> {
        let arg_vals = self.all_values(prev, &a.args)?;
        let mut out = Vec::new();
        for (combo, d) in self.combinations(&arg_vals, true)? {
            if let Ok(v) = prim::eval_primitive(&a.prim, &combo) {
                if !v.is_bottom() && prim::compare_terms(&v, &a.result) == prim::EqOutcome::Equal {
                    insert_max(self.dom, &mut out, d);
                }
            }
        }
        Ok(out)
    }

    /// `θ` with `param_i θ ⊑ arg_i`, taking the largest such bindings.
    fn match_params(params: &[Expr], args: &[Expr]) -> Option<Subst> {
        fn go(p: &Expr, a: &Expr, s: &mut Subst) -> bool {
            match (p, a) {
                (Expr::Var(x), _) => {
                    s.insert(x.clone(), a.clone());
                    true
                }
                (Expr::Num(x), Expr::Num(y)) => x == y,
                (Expr::App(f, ps), Expr::App(g, as_)) if f == g && ps.len() == as_.len() => {
                    ps.iter().zip(as_).all(|(p, a)| go(p, a, s))
                }
                _ => false,
            }
        }
        let mut s = Subst::new();
        params.iter().zip(args).all(|(p, a)| go(p, a, &mut s)).then_some(s)
    }

    fn apply_rule(
        &mut self,
        prev: &Interpretation,
        rule: &Rule,
        call: &Expr,
        args: &[Expr],
        next: &mut Interpretation,
    ) -> Result<(), OutOfBudget> {
        let Some(theta) = Self::match_params(&rule.params, args) else {
            return Ok(());
        };
        let extra: Vec<Var> = rule.vars().into_iter().filter(|v| !theta.contains(v)).collect();
        let mut thetas = vec![theta];
        for v in &extra {
            let mut grown = Vec::new();
            for t in &thetas {
                for u in self.universe.clone() {
                    self.tick()?;
                    let mut t2 = t.clone();
                    t2.insert(v.clone(), u);
                    grown.push(t2);
                }
            }
            thetas = grown;
        }
        for theta in thetas {
            let mut cond_q = vec![self.dom.top()];
            for c in &rule.conds {
                let qs = self.condition(prev, &c.apply(&theta))?;
                let mut merged = Vec::new();
                for a in &cond_q {
                    for b in &qs {
                        insert_max(self.dom, &mut merged, self.glb(a, b));
                    }
                }
                cond_q = merged;
                if cond_q.is_empty() {
                    break;
                }
            }
            if cond_q.is_empty() {
                continue;
            }
            for (v, d0) in self.values(prev, &rule.rhs.apply(&theta))? {
                if v.is_bottom() || !self.in_universe.contains(&v) {
                    continue;
                }
                for c in &cond_q {
                    let inner = self.glb(&d0, c);
                    let Ok(d) = self.dom.attenuate(&rule.alpha, &inner) else { continue };
                    if self.dom.is_usable(&d) {
                        let slot = next.facts.entry(call.clone()).or_default().entry(v.clone()).or_default();
                        insert_max(self.dom, slot, d);
                    }
                }
            }
        }
        Ok(())
    }

    fn tuples(&self, n: usize) -> Vec<Vec<Expr>> {
        let mut acc = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for prefix in &acc {
                for u in &self.universe {
                    let mut p: Vec<Expr> = prefix.clone();
                    p.push(u.clone());
                    next.push(p);
                }
            }
            acc = next;
        }
        acc
    }

    fn step(&mut self, prev: &Interpretation) -> Result<Interpretation, OutOfBudget> {
        let mut next = Interpretation::default();
        let mut arities: BTreeMap<Symbol, usize> = BTreeMap::new();
        for r in &self.program.rules {
            arities.entry(r.head.clone()).or_insert(r.arity());
        }
        for (f, n) in arities {
            for args in self.tuples(n) {
                let call = Expr::App(f.clone(), args.clone());
                for rule in self.program.rules.iter().filter(|r| r.head == f) {
                    self.apply_rule(prev, rule, &call, &args, &mut next)?;
                }
            }
        }
        Ok(next)
    }
}

fn same(dom: &QualDomain, a: &Interpretation, b: &Interpretation) -> bool {
    a.facts.len() == b.facts.len()
        && a.facts.iter().all(|(c, rs)| {
            b.facts.get(c).is_some_and(|rs2| {
                rs.len() == rs2.len()
                    && rs.iter().all(|(r, qs)| {
                        rs2.get(r).is_some_and(|qs2| {
                            qs.len() == qs2.len()
                                && qs.iter().all(|q| qs2.iter().any(|q2| dom.approx_eq(q, q2, TOL)))
                        })
                    })
            })
        })
}

/// Applies the transformer `depth` times starting from the interpretation of
/// trivial facts, restricted to calls and results over the universe.
pub fn bounded_lfp(program: &Program, dom: &QualDomain, cfg: &LfpConfig) -> Interpretation {
    let mut closed = BTreeSet::new();
    for u in &cfg.universe {
        subterms(u, &mut closed);
    }
    closed.insert(Expr::Bottom);
    let mut engine = Engine {
        program,
        dom,
        defined: program.rules.iter().map(|r| r.head.clone()).collect(),
        universe: closed.iter().cloned().collect(),
        in_universe: closed,
        steps: 0,
        budget: cfg.budget,
    };
    let mut current = Interpretation::default();
    for k in 0..cfg.depth {
        match engine.step(&current) {
            Ok(next) => {
                let fixed = same(dom, &next, &current);
                current = Interpretation {
                    iterations: k + 1,
                    ..next
                };
                if fixed {
                    current.saturated = true;
                    break;
                }
            }
            Err(OutOfBudget) => {
                current.partial = true;
                break;
            }
        }
    }
    current
}
