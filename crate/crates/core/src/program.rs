//! Programs, rules, goals and signatures.

use std::collections::BTreeMap;

use crate::prim;
use crate::qual::QualValue;
use crate::term::{Atom, Expr, Symbol, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymKind {
    Constructor,
    Primitive,
    Defined,
}

/// `DC`, `PF` and `DF` with arities. Primitives are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub ctors: BTreeMap<Symbol, usize>,
    pub defined: BTreeMap<Symbol, usize>,
}

impl Signature {
    pub fn kind(&self, s: &Symbol) -> SymKind {
        if prim::is_primitive(s.as_str()) {
            SymKind::Primitive
        } else if self.defined.contains_key(s) {
            SymKind::Defined
        } else {
            SymKind::Constructor
        }
    }

    pub fn is_defined(&self, s: &Symbol) -> bool {
        self.defined.contains_key(s)
    }

    pub fn is_ctor(&self, s: &Symbol) -> bool {
        self.kind(s) == SymKind::Constructor
    }

    pub fn arity(&self, s: &Symbol) -> Option<usize> {
        prim::arity(s.as_str())
            .or_else(|| self.defined.get(s).copied())
            .or_else(|| self.ctors.get(s).copied())
    }

    /// A term uses only constructors, variables, numbers and `⊥`.
    pub fn is_term(&self, e: &Expr) -> bool {
        match e {
            Expr::App(f, args) => self.is_ctor(f) && args.iter().all(|a| self.is_term(a)),
            _ => true,
        }
    }

    /// Variable, nullary constructor or number.
    pub fn is_simple(&self, e: &Expr) -> bool {
        match e {
            Expr::Var(_) | Expr::Num(_) => true,
            Expr::App(f, args) => args.is_empty() && self.is_ctor(f),
            Expr::Bottom => false,
        }
    }

    /// No defined symbol anywhere in the atom.
    pub fn is_primitive_atom(&self, a: &Atom) -> bool {
        a.args.iter().chain(std::iter::once(&a.result)).all(|e| !self.mentions_defined(e))
    }

    pub fn mentions_defined(&self, e: &Expr) -> bool {
        match e {
            Expr::App(f, args) => self.is_defined(f) || args.iter().any(|a| self.mentions_defined(a)),
            _ => false,
        }
    }
}

/// `data t = c1(ty, ...) | c2 | ...`, field types kept as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDecl {
    pub name: Symbol,
    pub ctors: Vec<(Symbol, Vec<String>)>,
}

/// `f(t1,...,tn) -α-> r <== δ1, ..., δm`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub head: Symbol,
    pub params: Vec<Expr>,
    pub alpha: QualValue<f64>,
    pub rhs: Expr,
    pub conds: Vec<Atom>,
}

impl Rule {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Variables of the rule in order of first occurrence (head, rhs, conditions).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.params.iter().for_each(|p| p.collect_vars(&mut out));
        self.rhs.collect_vars(&mut out);
        self.conds.iter().for_each(|c| c.collect_vars(&mut out));
        out
    }

    pub fn head_expr(&self) -> Expr {
        Expr::App(self.head.clone(), self.params.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    pub data: Vec<DataDecl>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        for r in &self.rules {
            sig.defined.entry(r.head.clone()).or_insert(r.params.len());
        }
        for d in &self.data {
            for (c, fields) in &d.ctors {
                sig.ctors.insert(c.clone(), fields.len());
            }
        }
        let mut seen = Vec::new();
        for r in &self.rules {
            r.params.iter().for_each(|p| collect_apps(p, &mut seen));
            collect_apps(&r.rhs, &mut seen);
            for c in &r.conds {
                c.args.iter().for_each(|a| collect_apps(a, &mut seen));
                collect_apps(&c.result, &mut seen);
            }
        }
        for (s, n) in seen {
            if !prim::is_primitive(s.as_str()) && !sig.defined.contains_key(&s) {
                sig.ctors.entry(s).or_insert(n);
            }
        }
        sig.ctors.entry(Symbol::new(crate::term::TRUE)).or_insert(0);
        sig.ctors.entry(Symbol::new(crate::term::FALSE)).or_insert(0);
        sig
    }

    pub fn rules_for<'a>(&'a self, f: &'a Symbol) -> impl Iterator<Item = (usize, &'a Rule)> + 'a {
        self.rules.iter().enumerate().filter(move |(_, r)| &r.head == f)
    }
}

pub(crate) fn collect_apps(e: &Expr, out: &mut Vec<(Symbol, usize)>) {
    if let Expr::App(f, args) = e {
        if !out.iter().any(|(s, _)| s == f) {
            out.push((f.clone(), args.len()));
        }
        args.iter().for_each(|a| collect_apps(a, out));
    }
}

/// One conjunct `δ # W` of a goal, with its threshold `W ⊒ β`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalPart {
    pub atom: Atom,
    pub qvar: Var,
    pub threshold: Option<QualValue<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Goal {
    pub parts: Vec<GoalPart>,
}

impl Goal {
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for p in &self.parts {
            p.atom.collect_vars(&mut out);
        }
        out
    }
}

/// A qualification-free goal: a conjunction of atomic constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CflpGoal {
    pub atoms: Vec<Atom>,
}

impl CflpGoal {
    pub fn vars(&self) -> Vec<Var> {
        crate::term::constraint_vars(&self.atoms)
    }
}
