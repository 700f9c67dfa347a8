//! Translation of qualified programs, statements and goals into
//! qualification-free constrained ones.
//!
//! Every defined function `f/n` becomes `f'/(n+1)`; the extra argument
//! carries the qualification of the call. Qualification constraints are
//! lowered to real constraints: `qVal(W)`, `W <= a * V`, `W <= a` and
//! `W >= b`, one per component for product domains.

use std::collections::BTreeSet;

use crate::error::{QcflpError, Result};
use crate::program::{CflpGoal, Goal, Program, Rule, Signature};
use crate::qual::{QualDomain, QualValue};
use crate::semantics::statement::{QcStatement, StatementBody};
use crate::term::{Atom, Expr, Symbol, Var};
use crate::prim;

/// Constructor packing the components of a product qualification.
pub const QPAIR: &str = "$q";
pub const SEED_VAR: &str = "QCFLP_SEED";

/// `f` becomes `f'`.
pub fn primed(f: &Symbol) -> Symbol {
    Symbol::new(&format!("{f}'"))
}

/// Seed for the fresh-variable supply, read from the environment.
pub fn seed_from_env() -> usize {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Result of transforming an expression: `(e', Ω, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed<T> {
    pub value: T,
    pub omega: Vec<Atom>,
    pub outer: Vec<Var>,
}

/// A translated qc-statement `ψ' ⟸ Π` with its extra constraints `Ω'`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedStatement {
    pub body: StatementBody,
    pub pi: Vec<Atom>,
    pub omega: Vec<Atom>,
}

/// Where each source rule went and which variables it introduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMap {
    pub source: usize,
    pub target: usize,
    pub head_var: Var,
    pub introduced: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub program: Program,
    pub map: Vec<RuleMap>,
}

pub struct Transformer {
    dom: QualDomain,
    sig: Signature,
    next: usize,
    introduced: Vec<Var>,
}

impl Transformer {
    pub fn new(dom: QualDomain, sig: Signature, seed: usize) -> Self {
        Transformer {
            dom,
            sig,
            next: seed,
            introduced: Vec::new(),
        }
    }

    pub fn domain(&self) -> &QualDomain {
        &self.dom
    }

    fn fresh(&mut self) -> Var {
        let v = Var::new(&format!("$W{}", self.next));
        self.next += 1;
        self.introduced.push(v.clone());
        v
    }

    /// Real variables standing for the components of `w`.
    pub fn components(&self, w: &Var) -> Vec<Var> {
        match self.dom.width() {
            1 => vec![w.clone()],
            n => (1..=n).map(|i| Var::new(&format!("{w}${i}"))).collect(),
        }
    }

    /// The term passed as the qualification argument of a call.
    pub fn qual_term(&self, w: &Var) -> Expr {
        match self.dom.width() {
            1 => Expr::Var(w.clone()),
            _ => Expr::app(QPAIR, self.components(w).into_iter().map(Expr::Var).collect()),
        }
    }

    pub fn qval(&self, w: &Var) -> Vec<Atom> {
        self.components(w)
            .into_iter()
            .map(|c| Atom::holds(prim::QVAL, vec![Expr::Var(c)]))
            .collect()
    }

    /// `encode[w ⊑ alpha ∘ v]`, or `encode[w ⊑ alpha]` without `v`.
    pub fn upper(&self, w: &Var, alpha: &QualValue<f64>, v: Option<&Var>) -> Vec<Atom> {
        let ws = self.components(w);
        let vs = v.map(|v| self.components(v));
        ws.iter()
            .zip(alpha.components())
            .enumerate()
            .map(|(i, (wc, a))| {
                let bound = match &vs {
                    None => Expr::num(a),
                    Some(vs) if a == 1.0 => Expr::Var(vs[i].clone()),
                    Some(vs) => Expr::app(prim::MUL, vec![Expr::num(a), Expr::Var(vs[i].clone())]),
                };
                Atom::holds(prim::LE, vec![Expr::Var(wc.clone()), bound])
            })
            .collect()
    }

    /// `encode[w ⊒ beta]`.
    pub fn lower(&self, w: &Var, beta: &QualValue<f64>) -> Vec<Atom> {
        self.components(w)
            .into_iter()
            .zip(beta.components())
            .map(|(c, b)| Atom::holds(prim::GE, vec![Expr::Var(c), Expr::num(b)]))
            .collect()
    }

    pub fn expr(&mut self, e: &Expr) -> Transformed<Expr> {
        match e {
            Expr::App(h, args) => {
                let mut omega = Vec::new();
                let mut outer = Vec::new();
                let mut out = Vec::with_capacity(args.len() + 1);
                for a in args {
                    let t = self.expr(a);
                    out.push(t.value);
                    omega.extend(t.omega);
                    outer.extend(t.outer);
                }
                if !self.sig.is_defined(h) {
                    return Transformed {
                        value: Expr::App(h.clone(), out),
                        omega,
                        outer,
                    };
                }
                let w = self.fresh();
                out.push(self.qual_term(&w));
                omega.extend(self.qval(&w));
                let top = self.dom.top();
                for v in &outer {
                    omega.extend(self.upper(&w, &top, Some(v)));
                }
                Transformed {
                    value: Expr::App(primed(h), out),
                    omega,
                    outer: vec![w],
                }
            }
            _ => Transformed {
                value: e.clone(),
                omega: Vec::new(),
                outer: Vec::new(),
            },
        }
    }

    pub fn atom(&mut self, a: &Atom) -> Transformed<Atom> {
        let mut omega = Vec::new();
        let mut outer = Vec::new();
        let mut args = Vec::with_capacity(a.args.len());
        for e in &a.args {
            let t = self.expr(e);
            args.push(t.value);
            omega.extend(t.omega);
            outer.extend(t.outer);
        }
        Transformed {
            value: Atom {
                prim: a.prim.clone(),
                args,
                result: a.result.clone(),
            },
            omega,
            outer,
        }
    }

    /// A qualified statement `ψ # d ⟸ Π`; unqualified statements only have
    /// their calls renamed.
    pub fn statement(&mut self, s: &QcStatement) -> TranslatedStatement {
        let (body, mut omega, outer) = match &s.body {
            StatementBody::Production(e, t) => {
                let tr = self.expr(e);
                (StatementBody::Production(tr.value, t.clone()), tr.omega, tr.outer)
            }
            StatementBody::Atom(a) => {
                let tr = self.atom(a);
                (StatementBody::Atom(tr.value), tr.omega, tr.outer)
            }
        };
        if let Some(d) = &s.qual {
            for w in &outer {
                omega.extend(self.lower(w, d));
            }
        }
        TranslatedStatement {
            body,
            pi: s.pi.clone(),
            omega,
        }
    }

    fn family(&self, w: &Var, alpha: &QualValue<f64>, outer: &[Var]) -> Vec<Atom> {
        if outer.is_empty() {
            return self.upper(w, alpha, None);
        }
        outer.iter().flat_map(|v| self.upper(w, alpha, Some(v))).collect()
    }

    pub fn rule(&mut self, r: &Rule) -> Rule {
        let w = self.fresh();
        let mut params = r.params.clone();
        params.push(self.qual_term(&w));
        let rhs = self.expr(&r.rhs);
        let mut conds = self.qval(&w);
        conds.extend(rhs.omega);
        conds.extend(self.family(&w, &r.alpha, &rhs.outer));
        for c in &r.conds {
            let t = self.atom(c);
            conds.extend(t.omega);
            conds.extend(self.family(&w, &r.alpha, &t.outer));
            conds.push(t.value);
        }
        Rule {
            head: primed(&r.head),
            params,
            alpha: self.dom.top(),
            rhs: rhs.value,
            conds,
        }
    }

    pub fn goal(&mut self, g: &Goal) -> CflpGoal {
        let mut atoms = Vec::new();
        let top = self.dom.top();
        for part in &g.parts {
            let t = self.atom(&part.atom);
            atoms.extend(t.omega);
            atoms.extend(self.qval(&part.qvar));
            atoms.extend(self.family(&part.qvar, &top, &t.outer));
            if let Some(beta) = &part.threshold {
                atoms.extend(self.lower(&part.qvar, beta));
            }
            atoms.push(t.value);
        }
        CflpGoal { atoms }
    }
}

fn clash_check(p: &Program) -> Result<()> {
    let sig = p.signature();
    let names: BTreeSet<&str> = sig
        .defined
        .keys()
        .chain(sig.ctors.keys())
        .map(Symbol::as_str)
        .collect();
    for f in sig.defined.keys() {
        let g = primed(f);
        if names.contains(g.as_str()) {
            return Err(QcflpError::Usage(format!(
                "cannot translate: `{g}` already names a symbol of the program"
            )));
        }
    }
    if sig.ctors.contains_key(&Symbol::new(QPAIR)) {
        return Err(QcflpError::Usage(format!("cannot translate: `{QPAIR}` is reserved")));
    }
    Ok(())
}

/// Translates every rule, keeping their order.
pub fn transform_program(p: &Program, dom: &QualDomain, seed: usize) -> Result<(Translation, Transformer)> {
    clash_check(p)?;
    let mut tr = Transformer::new(dom.clone(), p.signature(), seed);
    let mut rules = Vec::with_capacity(p.rules.len());
    let mut map = Vec::with_capacity(p.rules.len());
    for (i, r) in p.rules.iter().enumerate() {
        tr.introduced.clear();
        let t = tr.rule(r);
        let head_var = tr.introduced[0].clone();
        map.push(RuleMap {
            source: i,
            target: i,
            head_var,
            introduced: tr.introduced[1..].to_vec(),
        });
        rules.push(t);
    }
    Ok((
        Translation {
            program: Program {
                data: p.data.clone(),
                rules,
            },
            map,
        },
        tr,
    ))
}

/// Translates a goal against the program it will run on; fresh variables
/// continue the program's supply when `after` is given.
pub fn transform_goal(g: &Goal, p: &Program, dom: &QualDomain, after: Option<&Transformer>, seed: usize) -> CflpGoal {
    let next = after.map_or(seed, |t| t.next);
    Transformer::new(dom.clone(), p.signature(), next).goal(g)
}

fn occurrences(e: &Expr, v: &Var) -> usize {
    match e {
        Expr::Var(w) => usize::from(w == v),
        Expr::App(_, args) => args.iter().map(|a| occurrences(a, v)).sum(),
        _ => 0,
    }
}

fn atom_occurrences(a: &Atom, v: &Var) -> usize {
    a.args.iter().map(|e| occurrences(e, v)).sum::<usize>() + occurrences(&a.result, v)
}

/// Positions of a variable passed directly as an argument of a call.
fn arg_positions(e: &Expr, v: &Var) -> usize {
    match e {
        Expr::App(_, args) => args
            .iter()
            .map(|a| if a == &Expr::Var(v.clone()) { 1 } else { arg_positions(a, v) })
            .sum(),
        _ => 0,
    }
}

fn is_qval_of(a: &Atom, v: &Var) -> bool {
    a.prim.as_str() == prim::QVAL && a.args == [Expr::Var(v.clone())] && a.result.as_bool() == Some(true)
}

/// `X <= v` with `X` a variable other than `v`.
fn upper_var(a: &Atom, v: &Var) -> Option<Var> {
    if a.prim.as_str() != prim::LE || a.result.as_bool() != Some(true) || a.args[1] != Expr::Var(v.clone()) {
        return None;
    }
    match &a.args[0] {
        Expr::Var(x) if x != v => Some(x.clone()),
        _ => None,
    }
}

fn rename_expr(e: &Expr, from: &Var, to: &Var) -> Expr {
    e.rename(&mut |w| if w == from { to.clone() } else { w.clone() })
}

/// One elimination step over the conditions of a rule or goal, whose other
/// expressions are `exprs`. Returns the renamed variable pair.
fn eliminate_one(atoms: &[Atom], exprs: &[&Expr], candidates: &[Var]) -> Option<(Var, Var, usize, usize)> {
    for v in candidates {
        let qvals: Vec<usize> = (0..atoms.len()).filter(|&i| is_qval_of(&atoms[i], v)).collect();
        let uppers: Vec<(usize, Var)> = (0..atoms.len())
            .filter_map(|i| upper_var(&atoms[i], v).map(|x| (i, x)))
            .collect();
        if qvals.len() != 1 || uppers.len() != 1 {
            continue;
        }
        let (qi, (ui, x)) = (qvals[0], uppers[0].clone());
        let total: usize = atoms.iter().map(|a| atom_occurrences(a, v)).sum::<usize>()
            + exprs.iter().map(|e| occurrences(e, v)).sum::<usize>();
        let as_arg: usize = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != qi && *i != ui)
            .map(|(_, a)| a.args.iter().chain(std::iter::once(&a.result)).map(|e| arg_positions(e, v)).sum::<usize>())
            .sum::<usize>()
            + exprs.iter().map(|e| arg_positions(e, v)).sum::<usize>();
        if total == 3 && as_arg == 1 {
            return Some((v.clone(), x, qi, ui));
        }
    }
    None
}

fn simplify_parts(atoms: &mut Vec<Atom>, exprs: &mut [&mut Expr], candidates: &[Var]) {
    loop {
        let view: Vec<&Expr> = exprs.iter().map(|e| &**e).collect();
        let Some((v, x, qi, ui)) = eliminate_one(atoms, &view, candidates) else {
            return;
        };
        let mut kept = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if i != qi && i != ui {
                kept.push(a.rename(&mut |w| if *w == v { x.clone() } else { w.clone() }));
            }
        }
        *atoms = kept;
        for e in exprs.iter_mut() {
            **e = rename_expr(e, &v, &x);
        }
    }
}

fn introduced_vars(atoms: &[Atom], exprs: &[&Expr]) -> Vec<Var> {
    let mut vs = crate::term::constraint_vars(atoms);
    for e in exprs {
        for v in e.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
    }
    vs.retain(|v| v.as_str().starts_with("$W"));
    vs
}

/// Removes intermediate qualification variables that are only bounded by a
/// single other variable and passed to a single call. Only the certainty
/// domain is simplified.
pub fn simplify_goal(g: &CflpGoal, dom: &QualDomain) -> CflpGoal {
    if dom.width() != 1 {
        return g.clone();
    }
    let mut atoms = g.atoms.clone();
    let candidates = introduced_vars(&atoms, &[]);
    simplify_parts(&mut atoms, &mut [], &candidates);
    CflpGoal { atoms }
}

pub fn simplify_rule(r: &Rule, dom: &QualDomain) -> Rule {
    if dom.width() != 1 {
        return r.clone();
    }
    let mut out = r.clone();
    let head = out.params.last().and_then(Expr::as_var).cloned();
    let mut candidates = introduced_vars(&out.conds, &[&out.rhs]);
    candidates.retain(|v| Some(v) != head.as_ref());
    let mut rhs = out.rhs.clone();
    simplify_parts(&mut out.conds, &mut [&mut rhs], &candidates);
    out.rhs = rhs;
    out
}

pub fn simplify_program(p: &Program, dom: &QualDomain) -> Program {
    Program {
        data: p.data.clone(),
        rules: p.rules.iter().map(|r| simplify_rule(r, dom)).collect(),
    }
}
