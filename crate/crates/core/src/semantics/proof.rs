//! Proof trees for the qualified and unqualified rewriting logics, and a
//! mechanical checker for them.

use std::fmt;

use super::statement::{instantiate_rule, QcStatement, StatementBody};
use crate::prim;
use crate::program::Program;
use crate::qual::{QualDomain, QualValue};
use crate::solver::{self, EntailVerdict, TOL};
use crate::term::{Atom, Expr, Subst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Ti,
    Rr,
    Dc,
    Df,
    Pf,
    Ac,
}

impl Tag {
    pub const ALL: [Tag; 6] = [Tag::Ti, Tag::Rr, Tag::Dc, Tag::Df, Tag::Pf, Tag::Ac];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Ti => "TI",
            Tag::Rr => "RR",
            Tag::Dc => "DC",
            Tag::Df => "DF",
            Tag::Pf => "PF",
            Tag::Ac => "AC",
        }
    }

    /// Reads `TI` or `QTI` style names.
    pub fn parse(s: &str) -> Option<(Tag, bool)> {
        let (qualified, base) = match s.strip_prefix('Q') {
            Some(b) => (true, b),
            None => (false, s),
        };
        Tag::ALL
            .into_iter()
            .find(|t| t.name() == base)
            .map(|t| (t, qualified))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofTree {
    pub tag: Tag,
    pub conclusion: QcStatement,
    pub children: Vec<ProofTree>,
    /// Index of the program rule used by a `DF` step.
    pub rule: Option<usize>,
    /// Instantiating substitution of a `DF` step.
    pub theta: Subst,
}

impl ProofTree {
    pub fn leaf(tag: Tag, conclusion: QcStatement) -> Self {
        ProofTree {
            tag,
            conclusion,
            children: Vec::new(),
            rule: None,
            theta: Subst::new(),
        }
    }

    pub fn node(tag: Tag, conclusion: QcStatement, children: Vec<ProofTree>) -> Self {
        ProofTree {
            tag,
            conclusion,
            children,
            rule: None,
            theta: Subst::new(),
        }
    }

    pub fn tag_name(&self) -> String {
        if self.conclusion.qual.is_some() {
            format!("Q{}", self.tag.name())
        } else {
            self.tag.name().to_string()
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ProofTree::depth).max().unwrap_or(0)
    }

    /// Preorder traversal.
    pub fn nodes(&self) -> Vec<&ProofTree> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    /// The `i`-th node in preorder.
    pub fn node_mut(&mut self, i: usize) -> Option<&mut ProofTree> {
        let mut i = i;
        find_mut(self, &mut i)
    }
}

fn find_mut<'a>(t: &'a mut ProofTree, i: &mut usize) -> Option<&'a mut ProofTree> {
    if *i == 0 {
        return Some(t);
    }
    *i -= 1;
    for c in t.children.iter_mut() {
        if let Some(n) = find_mut(c, i) {
            return Some(n);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid { path: Vec<usize>, reason: String },
    Unknown { path: Vec<usize>, reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &[usize]| {
            if p.is_empty() {
                "root".to_string()
            } else {
                p.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(".")
            }
        };
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid { path, reason } => write!(f, "invalid at {}: {reason}", show(path)),
            Verdict::Unknown { path, reason } => write!(f, "unknown at {}: {reason}", show(path)),
        }
    }
}

enum Fail {
    Invalid(String),
    Unknown(String),
}

type Check = Result<(), Fail>;

fn bad<T>(msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail::Invalid(msg.into()))
}

struct Checker<'a> {
    program: &'a Program,
    dom: &'a QualDomain,
}

fn is_simple_value(e: &Expr, ctor: impl Fn(&crate::term::Symbol) -> bool) -> bool {
    match e {
        Expr::Var(_) | Expr::Num(_) => true,
        Expr::App(f, args) => args.is_empty() && ctor(f),
        Expr::Bottom => false,
    }
}

impl Checker<'_> {
    fn is_ctor(&self, f: &crate::term::Symbol) -> bool {
        !prim::is_primitive(f.as_str()) && !self.program.rules.iter().any(|r| &r.head == f)
    }

    fn is_defined(&self, f: &crate::term::Symbol) -> bool {
        self.program.rules.iter().any(|r| &r.head == f)
    }

    /// `d ⊑ bound` with the checker's tolerance.
    fn below(&self, d: &Option<QualValue<f64>>, bound: &Option<QualValue<f64>>) -> Check {
        match (d, bound) {
            (None, None) => Ok(()),
            (Some(d), Some(b)) => {
                if self.dom.leq_approx(d, b, TOL) {
                    Ok(())
                } else {
                    bad(format!("qualification {d} exceeds premise bound {b}"))
                }
            }
            _ => bad("premise and conclusion disagree on being qualified"),
        }
    }

    fn attenuated(&self, alpha: &QualValue<f64>, d: &Option<QualValue<f64>>) -> Result<Option<QualValue<f64>>, Fail> {
        match d {
            None => Ok(None),
            Some(d) => self
                .dom
                .attenuate(alpha, d)
                .map(Some)
                .map_err(|e| Fail::Invalid(e.to_string())),
        }
    }

    fn premise<'t>(&self, node: &'t ProofTree, i: usize) -> Result<&'t QcStatement, Fail> {
        let c = &node.children[i].conclusion;
        if c.pi != node.conclusion.pi {
            return bad(format!("premise {} has different hypotheses", i + 1));
        }
        self.below(&node.conclusion.qual, &c.qual)?;
        Ok(c)
    }

    fn production<'t>(&self, s: &'t QcStatement, i: usize) -> Result<(&'t Expr, &'t Expr), Fail> {
        match &s.body {
            StatementBody::Production(e, t) => Ok((e, t)),
            StatementBody::Atom(_) => bad(format!("premise {} should be a production", i + 1)),
        }
    }

    fn arity(&self, node: &ProofTree, n: usize) -> Check {
        if node.children.len() == n {
            Ok(())
        } else {
            bad(format!(
                "{} expects {n} premises, found {}",
                node.tag_name(),
                node.children.len()
            ))
        }
    }

    fn primitive_step(&self, node: &ProofTree, p: &crate::term::Symbol, args: &[Expr], v: &Expr) -> Check {
        if !prim::is_primitive(p.as_str()) {
            return bad(format!("`{p}` is not a primitive"));
        }
        if !is_simple_value(v, |f| self.is_ctor(f)) {
            return bad(format!("result `{v}` is not a variable, constant or number"));
        }
        self.arity(node, args.len())?;
        let mut terms = Vec::new();
        for (i, e) in args.iter().enumerate() {
            let prem = self.premise(node, i)?;
            let (pe, pt) = self.production(prem, i)?;
            if pe != e {
                return bad(format!("premise {} reduces `{pe}` instead of `{e}`", i + 1));
            }
            terms.push(pt.clone());
        }
        let goal = Atom {
            prim: p.clone(),
            args: terms,
            result: v.clone(),
        };
        if goal.args.iter().any(|t| !t.is_total()) {
            return bad(format!("`{goal}` has undefined arguments"));
        }
        match solver::entails(&node.conclusion.pi, &goal) {
            EntailVerdict::Entailed => Ok(()),
            EntailVerdict::NotEntailed(w) => bad(format!("`{goal}` is not entailed (counterexample {w})")),
            EntailVerdict::Unknown => Err(Fail::Unknown(format!("cannot decide whether `{goal}` is entailed"))),
        }
    }

    fn check_node(&self, node: &ProofTree) -> Check {
        let s = &node.conclusion;
        if let Some(d) = &s.qual {
            if !self.dom.is_usable(d) {
                return bad(format!("qualification {d} is not a usable value of {}", self.dom));
            }
        }
        let trivial = s.is_trivial();
        if trivial != (node.tag == Tag::Ti) {
            return if trivial {
                bad("trivial statements may only be concluded by TI")
            } else {
                bad("TI applies only to trivial statements")
            };
        }
        if node.tag != Tag::Df && (node.rule.is_some() || !node.theta.is_empty()) {
            return bad("only DF steps carry a rule instance");
        }
        match (node.tag, &s.body) {
            (Tag::Ti, _) => self.arity(node, 0),
            (Tag::Rr, StatementBody::Production(e, t)) => {
                self.arity(node, 0)?;
                match e {
                    Expr::Var(_) | Expr::Num(_) if e == t => Ok(()),
                    _ => bad(format!("RR needs `v -> v` with v a variable or number, found `{e} -> {t}`")),
                }
            }
            (Tag::Dc, StatementBody::Production(Expr::App(c, es), Expr::App(c2, ts))) => {
                if c != c2 || es.len() != ts.len() || !self.is_ctor(c) {
                    return bad("DC needs the same constructor on both sides");
                }
                self.arity(node, es.len())?;
                for (i, (e, t)) in es.iter().zip(ts).enumerate() {
                    let prem = self.premise(node, i)?;
                    let (pe, pt) = self.production(prem, i)?;
                    if pe != e || pt != t {
                        return bad(format!("premise {} should be `{e} -> {t}`", i + 1));
                    }
                }
                Ok(())
            }
            (Tag::Df, StatementBody::Production(Expr::App(f, es), t)) => self.check_df(node, f, es, t),
            (Tag::Pf, StatementBody::Production(Expr::App(p, es), v)) => self.primitive_step(node, p, es, v),
            (Tag::Ac, StatementBody::Atom(a)) => self.primitive_step(node, &a.prim, &a.args, &a.result),
            (tag, _) => bad(format!("{} does not apply to `{}`", tag.name(), s.body)),
        }
    }

    fn check_df(&self, node: &ProofTree, f: &crate::term::Symbol, es: &[Expr], t: &Expr) -> Check {
        if !self.is_defined(f) {
            return bad(format!("`{f}` is not a defined function"));
        }
        let Some(ri) = node.rule else {
            return bad("DF step without a rule index");
        };
        let Some(rule) = self.program.rules.get(ri) else {
            return bad(format!("rule index {} is out of range", ri + 1));
        };
        if &rule.head != f || rule.params.len() != es.len() {
            return bad(format!("rule {} does not define `{f}/{}`", ri + 1, es.len()));
        }
        let inst = instantiate_rule(rule, &node.theta);
        self.arity(node, es.len() + 1 + inst.conds.len())?;
        let d = &node.conclusion.qual;
        for (i, (e, ti)) in es.iter().zip(&inst.params).enumerate() {
            let prem = self.premise(node, i)?;
            let (pe, pt) = self.production(prem, i)?;
            if pe != e || pt != ti {
                return bad(format!("premise {} should be `{e} -> {ti}`", i + 1));
            }
        }
        let k = es.len();
        let rhs = &node.children[k].conclusion;
        if rhs.pi != node.conclusion.pi {
            return bad(format!("premise {} has different hypotheses", k + 1));
        }
        let (re, rt) = self.production(rhs, k)?;
        if re != &inst.rhs || rt != t {
            return bad(format!("premise {} should be `{} -> {t}`", k + 1, inst.rhs));
        }
        let bound = self.attenuated(&rule.alpha, &rhs.qual)?;
        self.below(d, &bound)?;
        for (j, c) in inst.conds.iter().enumerate() {
            let prem = &node.children[k + 1 + j].conclusion;
            if prem.pi != node.conclusion.pi {
                return bad(format!("premise {} has different hypotheses", k + 2 + j));
            }
            match &prem.body {
                StatementBody::Atom(a) if a == c => {}
                _ => return bad(format!("premise {} should be `{c}`", k + 2 + j)),
            }
            let bound = self.attenuated(&rule.alpha, &prem.qual)?;
            self.below(d, &bound)?;
        }
        Ok(())
    }

    fn walk(&self, node: &ProofTree, path: &mut Vec<usize>) -> Verdict {
        match self.check_node(node) {
            Ok(()) => {}
            Err(Fail::Invalid(reason)) => return Verdict::Invalid { path: path.clone(), reason },
            Err(Fail::Unknown(reason)) => return Verdict::Unknown { path: path.clone(), reason },
        }
        let mut unknown = None;
        for (i, c) in node.children.iter().enumerate() {
            path.push(i);
            let v = self.walk(c, path);
            path.pop();
            match v {
                Verdict::Valid => {}
                Verdict::Invalid { .. } => return v,
                Verdict::Unknown { .. } => {
                    unknown.get_or_insert(v);
                }
            }
        }
        unknown.unwrap_or(Verdict::Valid)
    }
}

/// Checks every inference step of `tree` against `program`.
pub fn check_proof(program: &Program, dom: &QualDomain, tree: &ProofTree) -> Verdict {
    let c = Checker { program, dom };
    c.walk(tree, &mut Vec::new())
}
