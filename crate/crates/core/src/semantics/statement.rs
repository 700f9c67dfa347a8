//! qc-statements and the substitution-mediated entailment between them.

use std::collections::BTreeMap;

use crate::program::{Rule, Signature};
use crate::qual::{QualDomain, QualValue};
use crate::solver::{self, EntailVerdict, SatVerdict, TOL};
use crate::term::{info_leq, Atom, Expr, Subst, Var};

#[derive(Debug, Clone, PartialEq)]
pub enum StatementBody {
    /// `e -> t`
    Production(Expr, Expr),
    /// `p(e1,...,en) == v`
    Atom(Atom),
}

/// `(e -> t) # d <== Π` or `δ # d <== Π`. Without a qualification the
/// statement belongs to the unqualified logic.
#[derive(Debug, Clone, PartialEq)]
pub struct QcStatement {
    pub body: StatementBody,
    pub qual: Option<QualValue<f64>>,
    pub pi: Vec<Atom>,
}

impl QcStatement {
    pub fn production(e: Expr, t: Expr, d: Option<QualValue<f64>>, pi: Vec<Atom>) -> Self {
        QcStatement {
            body: StatementBody::Production(e, t),
            qual: d,
            pi,
        }
    }

    pub fn atom(a: Atom, d: Option<QualValue<f64>>, pi: Vec<Atom>) -> Self {
        QcStatement {
            body: StatementBody::Atom(a),
            qual: d,
            pi,
        }
    }

    /// `t` is `⊥` or `Π` is unsatisfiable.
    pub fn is_trivial(&self) -> bool {
        if let StatementBody::Production(_, Expr::Bottom) = self.body {
            return true;
        }
        !self.pi.is_empty() && solver::satisfiable(&self.pi) == SatVerdict::Unsat
    }

    /// A production whose left side is a defined function applied to terms.
    pub fn is_qc_fact(&self, sig: &Signature) -> bool {
        match &self.body {
            StatementBody::Production(Expr::App(f, args), _) => {
                sig.is_defined(f) && args.iter().all(|a| sig.is_term(a))
            }
            _ => false,
        }
    }

    pub fn apply(&self, s: &Subst) -> QcStatement {
        QcStatement {
            body: match &self.body {
                StatementBody::Production(e, t) => StatementBody::Production(e.apply(s), t.apply(s)),
                StatementBody::Atom(a) => StatementBody::Atom(a.apply(s)),
            },
            qual: self.qual.clone(),
            pi: self.pi.iter().map(|a| a.apply(s)).collect(),
        }
    }

    pub fn with_qual(&self, d: Option<QualValue<f64>>) -> QcStatement {
        QcStatement {
            qual: d,
            ..self.clone()
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match &self.body {
            StatementBody::Production(e, t) => {
                e.collect_vars(&mut out);
                t.collect_vars(&mut out);
            }
            StatementBody::Atom(a) => a.collect_vars(&mut out),
        }
        self.pi.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

/// Applies `θ` to every part of a rule. `θ` may bind variables to partial
/// terms, so instances can contain `⊥`.
pub fn instantiate_rule(rule: &Rule, theta: &Subst) -> Rule {
    Rule {
        head: rule.head.clone(),
        params: rule.params.iter().map(|p| p.apply(theta)).collect(),
        alpha: rule.alpha.clone(),
        rhs: rule.rhs.apply(theta),
        conds: rule.conds.iter().map(|c| c.apply(theta)).collect(),
    }
}

/// Greatest common approximation of two partial terms.
fn info_glb(a: &Expr, b: &Expr) -> Expr {
    match (a, b) {
        (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => {
            Expr::App(f.clone(), xs.iter().zip(ys).map(|(x, y)| info_glb(x, y)).collect())
        }
        _ if a == b => a.clone(),
        _ => Expr::Bottom,
    }
}

/// Least common refinement, if the two partial terms are compatible.
fn info_lub(a: &Expr, b: &Expr) -> Option<Expr> {
    match (a, b) {
        (Expr::Bottom, _) => Some(b.clone()),
        (_, Expr::Bottom) => Some(a.clone()),
        (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => Some(Expr::App(
            f.clone(),
            xs.iter().zip(ys).map(|(x, y)| info_lub(x, y)).collect::<Option<_>>()?,
        )),
        _ if a == b => Some(a.clone()),
        _ => None,
    }
}

/// Keeps only the constructor structure leading to variables.
fn var_spine(e: &Expr) -> Expr {
    match e {
        Expr::Var(_) => e.clone(),
        Expr::App(f, args) if !e.vars().is_empty() => {
            Expr::App(f.clone(), args.iter().map(var_spine).collect())
        }
        _ => Expr::Bottom,
    }
}

/// The largest partial term approximating `e` that contains only
/// constructors, numbers and variables.
fn term_part(e: &Expr, sig: Option<&Signature>) -> Expr {
    match e {
        Expr::App(f, args) => {
            let ctor = match sig {
                Some(s) => s.is_ctor(f),
                None => !crate::prim::is_primitive(f.as_str()),
            };
            if ctor {
                Expr::App(f.clone(), args.iter().map(|a| term_part(a, sig)).collect())
            } else {
                Expr::Bottom
            }
        }
        _ => e.clone(),
    }
}

#[derive(Default)]
struct Bounds {
    upper: BTreeMap<Var, Expr>,
    lower: BTreeMap<Var, Expr>,
}

impl Bounds {
    /// Requirements on `σ` so that `pσ ⊑ q`.
    fn below(&mut self, p: &Expr, q: &Expr, sig: Option<&Signature>) -> bool {
        match (p, q) {
            (Expr::Bottom, _) => true,
            (Expr::Var(x), _) => {
                let q = term_part(q, sig);
                let u = match self.upper.get(x) {
                    Some(old) => info_glb(old, &q),
                    None => q,
                };
                self.upper.insert(x.clone(), u);
                true
            }
            (Expr::Num(a), Expr::Num(b)) => a == b,
            (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| self.below(x, y, sig))
            }
            _ => false,
        }
    }

    /// Requirements on `σ` so that `pσ ⊒ q`.
    fn above(&mut self, p: &Expr, q: &Expr) -> bool {
        match (p, q) {
            (_, Expr::Bottom) => true,
            (Expr::Var(x), _) => {
                let l = match self.lower.get(x) {
                    Some(old) => match info_lub(old, q) {
                        Some(l) => l,
                        None => return false,
                    },
                    None => q.clone(),
                };
                self.lower.insert(x.clone(), l);
                true
            }
            (Expr::Num(a), Expr::Num(b)) => a == b,
            (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| self.above(x, y))
            }
            _ => false,
        }
    }
}

fn atom_leq(a: &Atom, b: &Atom) -> bool {
    a.prim == b.prim
        && a.args.len() == b.args.len()
        && a.args.iter().zip(&b.args).all(|(x, y)| info_leq(x, y))
        && info_leq(&a.result, &b.result)
}

/// The individual conditions of entailment for a fixed `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentChecks {
    /// `Π′ ⊨ Πσ`
    pub constraints: bool,
    /// `d ⊒ d′`
    pub qualification: bool,
    /// `eσ ⊑ e′` and `tσ ⊒ t′`, or `δσ ⊑ δ′`
    pub orderings: bool,
}

impl EntailmentChecks {
    pub fn all(&self) -> bool {
        self.constraints && self.qualification && self.orderings
    }
}

fn constraints_entailed(pi_prime: &[Atom], pi_sigma: &[Atom]) -> bool {
    if pi_sigma.is_empty() {
        return true;
    }
    if !pi_prime.is_empty() && solver::satisfiable(pi_prime) == SatVerdict::Unsat {
        return true;
    }
    pi_sigma.iter().all(|a| {
        let partial = a.args.iter().chain(std::iter::once(&a.result)).any(|e| !e.is_total());
        !partial && solver::entails(pi_prime, a) == EntailVerdict::Entailed
    })
}

/// Evaluates each condition of `φ ⊨σ φ′`.
pub fn entailment_checks(
    dom: &QualDomain,
    phi: &QcStatement,
    phi2: &QcStatement,
    sigma: &Subst,
) -> EntailmentChecks {
    let qualification = match (&phi.qual, &phi2.qual) {
        (Some(d), Some(d2)) => dom.leq_approx(d2, d, TOL),
        (None, None) => true,
        _ => false,
    };
    let orderings = match (&phi.body, &phi2.body) {
        (StatementBody::Production(e, t), StatementBody::Production(e2, t2)) => {
            info_leq(&e.apply(sigma), e2) && info_leq(t2, &t.apply(sigma))
        }
        (StatementBody::Atom(a), StatementBody::Atom(a2)) => atom_leq(&a.apply(sigma), a2),
        _ => false,
    };
    let pi_sigma: Vec<Atom> = phi.pi.iter().map(|a| a.apply(sigma)).collect();
    EntailmentChecks {
        constraints: constraints_entailed(&phi2.pi, &pi_sigma),
        qualification,
        orderings,
    }
}

const MAX_COMBINATIONS: usize = 256;

/// Searches for `σ` witnessing that `φ` entails `φ′`.
pub fn qc_entails(dom: &QualDomain, phi: &QcStatement, phi2: &QcStatement) -> Option<Subst> {
    qc_entails_in(dom, phi, phi2, None)
}

/// As [`qc_entails`], using `sig` to tell constructors from defined symbols.
pub fn qc_entails_in(
    dom: &QualDomain,
    phi: &QcStatement,
    phi2: &QcStatement,
    sig: Option<&Signature>,
) -> Option<Subst> {
    let mut b = Bounds::default();
    let shaped = match (&phi.body, &phi2.body) {
        (StatementBody::Production(e, t), StatementBody::Production(e2, t2)) => {
            b.below(e, e2, sig) && b.above(t, t2)
        }
        (StatementBody::Atom(a), StatementBody::Atom(a2)) => {
            a.prim == a2.prim
                && a.args.len() == a2.args.len()
                && a.args.iter().zip(&a2.args).all(|(x, y)| b.below(x, y, sig))
                && b.below(&a.result, &a2.result, sig)
        }
        _ => false,
    };
    if !shaped {
        return None;
    }
    let mut vars: Vec<Var> = b.upper.keys().chain(b.lower.keys()).cloned().collect();
    vars.sort();
    vars.dedup();
    let mut choices: Vec<(Var, Vec<Expr>)> = Vec::new();
    for v in vars {
        let up = b.upper.get(&v);
        let low = b.lower.get(&v);
        let mut cands: Vec<Expr> = Vec::new();
        let mut push = |e: Expr| {
            let fits = low.is_none_or(|l| info_leq(l, &e)) && up.is_none_or(|u| info_leq(&e, u));
            if fits && !cands.contains(&e) {
                cands.push(e);
            }
        };
        if let Some(u) = up {
            let spine = var_spine(u);
            if let Some(l) = low {
                if let Some(x) = info_lub(&spine, l) {
                    push(x);
                }
            }
            push(spine);
            push(u.clone());
        }
        if let Some(l) = low {
            push(l.clone());
        }
        if cands.is_empty() {
            return None;
        }
        choices.push((v, cands));
    }
    let mut index = vec![0usize; choices.len()];
    for _ in 0..MAX_COMBINATIONS {
        let sigma: Subst = choices
            .iter()
            .zip(&index)
            .map(|((v, cs), &i)| (v.clone(), cs[i].clone()))
            .collect();
        if entailment_checks(dom, phi, phi2, &sigma).all() {
            return Some(sigma);
        }
        let mut k = 0;
        loop {
            if k == index.len() {
                return None;
            }
            index[k] += 1;
            if index[k] < choices[k].1.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
    None
}
