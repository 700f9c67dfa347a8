//! Interval propagation over real constraints: satisfiability and entailment.
//!
//! Arithmetic sub-expressions are narrowed with a forward/backward revise
//! pass per constraint, repeated to a fixpoint. Constraints outside the
//! numeric fragment (constructor equalities with unbound variables,
//! disjunctive negations) are kept aside and only decided once a witness
//! grounds them.

use std::collections::BTreeMap;
use std::fmt;

use crate::prim::{self, compare_terms, EqOutcome};
use crate::term::{Atom, Expr, Subst, Var};

/// Absolute tolerance for numeric comparisons and emptiness tests.
pub const TOL: f64 = 1e-9;

const MAX_ROUNDS: usize = 100;
const WITNESS_BUDGET: usize = 4000;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const FULL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn new(lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_open: lo_open || lo.is_infinite(),
            hi_open: hi_open || hi.is_infinite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, false, hi, false)
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn at_most(hi: f64, open: bool) -> Self {
        Interval::new(f64::NEG_INFINITY, true, hi, open)
    }

    pub fn at_least(lo: f64, open: bool) -> Self {
        Interval::new(lo, open, f64::INFINITY, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo > self.hi + TOL
            || ((self.lo_open || self.hi_open) && self.lo >= self.hi)
    }

    pub fn is_point(&self) -> bool {
        !self.lo_open && !self.hi_open && self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo - TOL };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi + TOL };
        above && below
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_open) = if self.lo > o.lo {
            (self.lo, self.lo_open)
        } else if o.lo > self.lo {
            (o.lo, o.lo_open)
        } else {
            (self.lo, self.lo_open || o.lo_open)
        };
        let (hi, hi_open) = if self.hi < o.hi {
            (self.hi, self.hi_open)
        } else if o.hi < self.hi {
            (o.hi, o.hi_open)
        } else {
            (self.hi, self.hi_open || o.hi_open)
        };
        Interval::new(lo, lo_open, hi, hi_open)
    }

    fn neg(&self) -> Interval {
        Interval::new(-self.hi, self.hi_open, -self.lo, self.lo_open)
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval::new(
            self.lo + o.lo,
            self.lo_open || o.lo_open,
            self.hi + o.hi,
            self.hi_open || o.hi_open,
        )
    }

    fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Interval) -> Interval {
        let ends = |x: f64, xo: bool, y: f64, yo: bool| {
            let v = if x == 0.0 || y == 0.0 { 0.0 } else { x * y };
            let closed_zero = (x == 0.0 && !xo) || (y == 0.0 && !yo);
            (v, (xo || yo) && !closed_zero)
        };
        let cands = [
            ends(self.lo, self.lo_open, o.lo, o.lo_open),
            ends(self.lo, self.lo_open, o.hi, o.hi_open),
            ends(self.hi, self.hi_open, o.lo, o.lo_open),
            ends(self.hi, self.hi_open, o.hi, o.hi_open),
        ];
        let mut lo = (f64::INFINITY, true);
        let mut hi = (f64::NEG_INFINITY, true);
        for (v, open) in cands {
            if v < lo.0 || (v == lo.0 && !open) {
                lo = (v, open && (v != lo.0 || lo.1));
            }
            if v > hi.0 || (v == hi.0 && !open) {
                hi = (v, open && (v != hi.0 || hi.1));
            }
        }
        Interval::new(lo.0, lo.1, hi.0, hi.1)
    }

    fn contains_zero(&self) -> bool {
        let above = if self.lo_open { 0.0 > self.lo } else { 0.0 >= self.lo };
        let below = if self.hi_open { 0.0 < self.hi } else { 0.0 <= self.hi };
        above && below
    }

    fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        let positive = self.lo >= 0.0;
        let inv = |x: f64| match (x == 0.0, positive) {
            (true, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            _ => 1.0 / x,
        };
        Some(Interval::new(inv(self.hi), self.hi_open, inv(self.lo), self.lo_open))
    }

    fn div(&self, o: &Interval) -> Interval {
        match o.recip() {
            Some(r) => self.mul(&r),
            None => Interval::FULL,
        }
    }

    fn differs(&self, o: &Interval) -> bool {
        (self.lo - o.lo).abs() > 1e-12
            || (self.hi - o.hi).abs() > 1e-12
            || self.lo_open != o.lo_open
            || self.hi_open != o.hi_open
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        let close = if self.hi_open { ')' } else { ']' };
        write!(f, "{open}{}, {}{close}", fmt_bound(self.lo), fmt_bound(self.hi))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let rounded = (x * 1e12).round() / 1e12;
        format!("{rounded}")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum NExpr {
    Num(f64),
    Var(usize),
    Bin(char, Box<NExpr>, Box<NExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
}

#[derive(Clone, Debug)]
struct Cons {
    lhs: NExpr,
    rel: Rel,
    rhs: NExpr,
}

#[derive(Clone, Debug)]
enum Norm {
    Num(Vec<Cons>),
    Decided(bool),
    Opaque(Atom),
}

#[derive(Default, Clone)]
struct VarTable {
    vars: Vec<Var>,
}

impl VarTable {
    fn index(&mut self, v: &Var) -> usize {
        if let Some(i) = self.vars.iter().position(|w| w == v) {
            i
        } else {
            self.vars.push(v.clone());
            self.vars.len() - 1
        }
    }
}

fn op_char(name: &str) -> Option<char> {
    match name {
        prim::ADD => Some('+'),
        prim::SUB => Some('-'),
        prim::MUL => Some('*'),
        prim::DIV => Some('/'),
        _ => None,
    }
}

fn numeric(e: &Expr, vt: &mut VarTable) -> Option<NExpr> {
    match e {
        Expr::Num(x) => Some(NExpr::Num(*x)),
        Expr::Var(v) => Some(NExpr::Var(vt.index(v))),
        Expr::App(f, args) if args.len() == 2 => {
            let op = op_char(f.as_str())?;
            Some(NExpr::Bin(
                op,
                Box::new(numeric(&args[0], vt)?),
                Box::new(numeric(&args[1], vt)?),
            ))
        }
        _ => None,
    }
}

fn has_primitive(e: &Expr) -> bool {
    match e {
        Expr::App(f, args) => prim::is_primitive(f.as_str()) || args.iter().any(has_primitive),
        _ => false,
    }
}

fn cmp_cons(name: &str, l: NExpr, r: NExpr, positive: bool) -> Cons {
    // Normalizes `l op r` (or its negation) into Lt/Le with operands ordered.
    let (rel, swap) = match (name, positive) {
        (prim::LT, true) => (Rel::Lt, false),
        (prim::LE, true) => (Rel::Le, false),
        (prim::GT, true) => (Rel::Lt, true),
        (prim::GE, true) => (Rel::Le, true),
        (prim::LT, false) => (Rel::Le, true),
        (prim::LE, false) => (Rel::Lt, true),
        (prim::GT, false) => (Rel::Le, false),
        _ => (Rel::Lt, false),
    };
    if swap {
        Cons { lhs: r, rel, rhs: l }
    } else {
        Cons { lhs: l, rel, rhs: r }
    }
}

fn normalize(a: &Atom, vt: &mut VarTable) -> Norm {
    let name = a.prim.as_str();
    let result_bool = a.result.as_bool();
    if prim::is_comparison(name) && a.args.len() == 2 {
        let Some(b) = result_bool else {
            return if matches!(a.result, Expr::Var(_)) {
                Norm::Opaque(a.clone())
            } else {
                Norm::Decided(false)
            };
        };
        let mut probe = vt.clone();
        match (numeric(&a.args[0], &mut probe), numeric(&a.args[1], &mut probe)) {
            (Some(l), Some(r)) => {
                *vt = probe;
                Norm::Num(vec![cmp_cons(name, l, r, b)])
            }
            _ if a.args.iter().all(Expr::is_ground) => Norm::Decided(false),
            _ => Norm::Opaque(a.clone()),
        }
    } else if prim::is_arithmetic(name) && a.args.len() == 2 {
        let mut probe = vt.clone();
        let lhs = numeric(&a.lhs(), &mut probe);
        let rhs = numeric(&a.result, &mut probe);
        match (lhs, rhs) {
            (Some(l), Some(r)) => {
                *vt = probe;
                Norm::Num(vec![Cons { lhs: l, rel: Rel::Eq, rhs: r }])
            }
            _ => Norm::Opaque(a.clone()),
        }
    } else if name == prim::QVAL && a.args.len() == 1 {
        let mut probe = vt.clone();
        match (numeric(&a.args[0], &mut probe), result_bool) {
            (Some(x), Some(true)) => {
                *vt = probe;
                Norm::Num(vec![
                    Cons { lhs: NExpr::Num(0.0), rel: Rel::Lt, rhs: x.clone() },
                    Cons { lhs: x, rel: Rel::Le, rhs: NExpr::Num(1.0) },
                ])
            }
            (Some(NExpr::Num(x)), Some(false)) => Norm::Decided(!(x > 0.0 && x <= 1.0)),
            _ => Norm::Opaque(a.clone()),
        }
    } else if name == prim::EQ && a.args.len() == 2 {
        let Some(b) = result_bool else {
            return Norm::Opaque(a.clone());
        };
        let mut probe = vt.clone();
        if let (Some(l), Some(r)) = (numeric(&a.args[0], &mut probe), numeric(&a.args[1], &mut probe)) {
            *vt = probe;
            let rel = if b { Rel::Eq } else { Rel::Ne };
            return Norm::Num(vec![Cons { lhs: l, rel, rhs: r }]);
        }
        if has_primitive(&a.args[0]) || has_primitive(&a.args[1]) {
            return Norm::Opaque(a.clone());
        }
        match compare_terms(&a.args[0], &a.args[1]) {
            EqOutcome::Equal => Norm::Decided(b),
            EqOutcome::Clash => Norm::Decided(!b),
            EqOutcome::Undecided => Norm::Opaque(a.clone()),
        }
    } else {
        Norm::Opaque(a.clone())
    }
}

struct Empty;

struct Store {
    boxes: Vec<Interval>,
}

impl Store {
    fn fwd(&self, e: &NExpr) -> Interval {
        match e {
            NExpr::Num(x) => Interval::point(*x),
            NExpr::Var(i) => self.boxes[*i],
            NExpr::Bin(op, a, b) => {
                let (ia, ib) = (self.fwd(a), self.fwd(b));
                match op {
                    '+' => ia.add(&ib),
                    '-' => ia.sub(&ib),
                    '*' => ia.mul(&ib),
                    _ => ia.div(&ib),
                }
            }
        }
    }

    fn bwd(&mut self, e: &NExpr, target: Interval) -> Result<(), Empty> {
        match e {
            NExpr::Num(x) => {
                if target.contains(*x) {
                    Ok(())
                } else {
                    Err(Empty)
                }
            }
            NExpr::Var(i) => {
                let next = self.boxes[*i].intersect(&target);
                if next.is_empty() {
                    return Err(Empty);
                }
                self.boxes[*i] = next;
                Ok(())
            }
            NExpr::Bin(op, a, b) => {
                let (ia, ib) = (self.fwd(a), self.fwd(b));
                let here = match op {
                    '+' => ia.add(&ib),
                    '-' => ia.sub(&ib),
                    '*' => ia.mul(&ib),
                    _ => ia.div(&ib),
                };
                let r = here.intersect(&target);
                if r.is_empty() {
                    return Err(Empty);
                }
                match op {
                    '+' => {
                        self.bwd(a, r.sub(&ib))?;
                        let ia = self.fwd(a);
                        self.bwd(b, r.sub(&ia))
                    }
                    '-' => {
                        self.bwd(a, r.add(&ib))?;
                        let ia = self.fwd(a);
                        self.bwd(b, ia.sub(&r))
                    }
                    '*' => {
                        if !ib.contains_zero() {
                            self.bwd(a, r.div(&ib))?;
                        }
                        let ia = self.fwd(a);
                        if !ia.contains_zero() {
                            self.bwd(b, r.div(&ia))?;
                        }
                        Ok(())
                    }
                    _ => {
                        self.bwd(a, r.mul(&ib))?;
                        if !r.contains_zero() {
                            let ia = self.fwd(a);
                            self.bwd(b, ia.div(&r))?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }

    fn revise(&mut self, c: &Cons) -> Result<(), Empty> {
        let (il, ir) = (self.fwd(&c.lhs), self.fwd(&c.rhs));
        match c.rel {
            Rel::Le => {
                self.bwd(&c.lhs, Interval::at_most(ir.hi, ir.hi_open))?;
                let il = self.fwd(&c.lhs);
                self.bwd(&c.rhs, Interval::at_least(il.lo, il.lo_open))
            }
            Rel::Lt => {
                self.bwd(&c.lhs, Interval::at_most(ir.hi, true))?;
                let il = self.fwd(&c.lhs);
                self.bwd(&c.rhs, Interval::at_least(il.lo, true))
            }
            Rel::Eq => {
                self.bwd(&c.lhs, ir)?;
                let il = self.fwd(&c.lhs);
                self.bwd(&c.rhs, il)
            }
            Rel::Ne => {
                if il.is_point() && ir.is_point() && il.lo == ir.lo {
                    Err(Empty)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn propagate(&mut self, cons: &[Cons]) -> Result<(), Empty> {
        for _ in 0..MAX_ROUNDS {
            let before = self.boxes.clone();
            for c in cons {
                self.revise(c)?;
            }
            if !before.iter().zip(&self.boxes).any(|(a, b)| a.differs(b)) {
                return Ok(());
            }
        }
        Ok(())
    }
}

fn eval_at(e: &NExpr, w: &[f64]) -> Option<f64> {
    match e {
        NExpr::Num(x) => Some(*x),
        NExpr::Var(i) => Some(w[*i]),
        NExpr::Bin(op, a, b) => {
            let (x, y) = (eval_at(a, w)?, eval_at(b, w)?);
            let name = match op {
                '+' => prim::ADD,
                '-' => prim::SUB,
                '*' => prim::MUL,
                _ => prim::DIV,
            };
            prim::apply_arith(name, x, y)
        }
    }
}

fn holds_at(c: &Cons, w: &[f64]) -> bool {
    let (Some(l), Some(r)) = (eval_at(&c.lhs, w), eval_at(&c.rhs, w)) else {
        return false;
    };
    match c.rel {
        Rel::Lt => l < r,
        Rel::Le => l <= r + TOL,
        Rel::Eq => (l - r).abs() <= TOL,
        Rel::Ne => l != r,
    }
}

fn negate(c: &Cons) -> Vec<Cons> {
    let (l, r) = (c.lhs.clone(), c.rhs.clone());
    match c.rel {
        Rel::Lt => vec![Cons { lhs: r, rel: Rel::Le, rhs: l }],
        Rel::Le => vec![Cons { lhs: r, rel: Rel::Lt, rhs: l }],
        Rel::Eq => vec![
            Cons { lhs: l.clone(), rel: Rel::Lt, rhs: r.clone() },
            Cons { lhs: r, rel: Rel::Lt, rhs: l },
        ],
        Rel::Ne => vec![Cons { lhs: l, rel: Rel::Eq, rhs: r }],
    }
}

/// Result of a satisfiability query.
#[derive(Clone, Debug, PartialEq)]
pub enum SatVerdict {
    Sat(Subst),
    Unsat,
    Unknown,
}

/// Result of an entailment query `Π ⊨ π`.
#[derive(Clone, Debug, PartialEq)]
pub enum EntailVerdict {
    Entailed,
    NotEntailed(Subst),
    Unknown,
}

/// Outcome of propagating a constraint set.
#[derive(Clone, Debug, PartialEq)]
pub enum Propagation {
    Empty,
    /// Per-variable boxes; `complete` is false when some constraints were
    /// outside the numeric fragment and did not take part.
    Boxes {
        boxes: BTreeMap<Var, Interval>,
        complete: bool,
    },
}

struct Prepared {
    vt: VarTable,
    cons: Vec<Cons>,
    opaque: Vec<Atom>,
    decided_false: bool,
}

fn prepare(cs: &[Atom]) -> Prepared {
    let mut p = Prepared {
        vt: VarTable::default(),
        cons: Vec::new(),
        opaque: Vec::new(),
        decided_false: false,
    };
    for a in cs {
        match normalize(a, &mut p.vt) {
            Norm::Num(cs) => p.cons.extend(cs),
            Norm::Decided(b) => p.decided_false |= !b,
            Norm::Opaque(a) => p.opaque.push(a),
        }
    }
    p
}

fn initial_store(n: usize) -> Store {
    Store {
        boxes: vec![Interval::FULL; n],
    }
}

/// Narrows per-variable intervals to a fixpoint.
pub fn propagate(cs: &[Atom]) -> Propagation {
    let p = prepare(cs);
    if p.decided_false {
        return Propagation::Empty;
    }
    let mut store = initial_store(p.vt.vars.len());
    if store.propagate(&p.cons).is_err() {
        return Propagation::Empty;
    }
    Propagation::Boxes {
        boxes: p.vt.vars.iter().cloned().zip(store.boxes).collect(),
        complete: p.opaque.is_empty(),
    }
}

fn candidates(iv: &Interval) -> Vec<f64> {
    let mut out = Vec::new();
    let finite_lo = iv.lo.is_finite();
    let finite_hi = iv.hi.is_finite();
    if finite_hi && !iv.hi_open {
        out.push(iv.hi);
    }
    if finite_lo && !iv.lo_open {
        out.push(iv.lo);
    }
    if finite_lo && finite_hi {
        out.push((iv.lo + iv.hi) / 2.0);
    }
    let delta = if finite_lo && finite_hi {
        ((iv.hi - iv.lo) / 2.0).min(1e-6)
    } else {
        1.0
    };
    if finite_hi {
        out.push(iv.hi - delta);
        out.push(iv.hi - 1.0);
    }
    if finite_lo {
        out.push(iv.lo + delta);
        out.push(iv.lo + 1.0);
    }
    if !finite_lo && !finite_hi {
        out.extend([0.0, 1.0, -1.0]);
    }
    let mut seen: Vec<f64> = Vec::new();
    for x in out {
        if iv.contains(x) && !seen.contains(&x) {
            seen.push(x);
        }
    }
    seen
}

fn search_witness(
    p: &Prepared,
    store: &Store,
    next: usize,
    budget: &mut usize,
) -> Option<Vec<f64>> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    if next == store.boxes.len() {
        let w: Vec<f64> = store.boxes.iter().map(|b| b.lo).collect();
        return p.cons.iter().all(|c| holds_at(c, &w)).then_some(w);
    }
    for x in candidates(&store.boxes[next]) {
        let mut s = Store {
            boxes: store.boxes.clone(),
        };
        s.boxes[next] = Interval::point(x);
        if s.propagate(&p.cons).is_err() {
            continue;
        }
        s.boxes[next] = Interval::point(x);
        if let Some(w) = search_witness(p, &s, next + 1, budget) {
            return Some(w);
        }
    }
    None
}

fn witness_subst(vt: &VarTable, w: &[f64]) -> Subst {
    vt.vars
        .iter()
        .cloned()
        .zip(w.iter().map(|x| Expr::num(*x)))
        .collect()
}

fn opaque_holds(a: &Atom, s: &Subst) -> Option<bool> {
    let g = a.apply(s);
    if !g.args.iter().all(Expr::is_ground) || !g.result.is_ground() {
        return None;
    }
    let mut vt = VarTable::default();
    match normalize(&g, &mut vt) {
        Norm::Decided(b) => Some(b),
        Norm::Num(cs) => Some(cs.iter().all(|c| holds_at(c, &[]))),
        Norm::Opaque(g) => {
            let v = prim::eval_primitive(&g.prim, &g.args).ok()?;
            if v.is_bottom() {
                return Some(false);
            }
            Some(compare_terms(&v, &g.result) == EqOutcome::Equal)
        }
    }
}

fn satisfiable_prepared(p: &Prepared) -> SatVerdict {
    if p.decided_false {
        return SatVerdict::Unsat;
    }
    let mut store = initial_store(p.vt.vars.len());
    if store.propagate(&p.cons).is_err() {
        return SatVerdict::Unsat;
    }
    let mut budget = WITNESS_BUDGET;
    let Some(w) = search_witness(p, &store, 0, &mut budget) else {
        return SatVerdict::Unknown;
    };
    let s = witness_subst(&p.vt, &w);
    for a in &p.opaque {
        if opaque_holds(a, &s) != Some(true) {
            return SatVerdict::Unknown;
        }
    }
    SatVerdict::Sat(s)
}

/// Three-valued satisfiability with a witness valuation on success.
pub fn satisfiable(cs: &[Atom]) -> SatVerdict {
    satisfiable_prepared(&prepare(cs))
}

/// Three-valued entailment `Π ⊨ π` with a counterexample on failure.
pub fn entails(pi: &[Atom], goal: &Atom) -> EntailVerdict {
    if pi.contains(goal) {
        return EntailVerdict::Entailed;
    }
    let mut p = prepare(pi);
    if p.decided_false {
        return EntailVerdict::Entailed;
    }
    let mut base = initial_store(p.vt.vars.len());
    if base.propagate(&p.cons).is_err() {
        return EntailVerdict::Entailed;
    }
    let goal_norm = normalize(goal, &mut p.vt);
    let goal_cons = match goal_norm {
        Norm::Decided(true) => return EntailVerdict::Entailed,
        Norm::Decided(false) => {
            return match satisfiable_prepared(&p) {
                SatVerdict::Sat(w) => EntailVerdict::NotEntailed(w),
                SatVerdict::Unsat => EntailVerdict::Entailed,
                SatVerdict::Unknown => EntailVerdict::Unknown,
            }
        }
        Norm::Opaque(_) => return EntailVerdict::Unknown,
        Norm::Num(cs) => cs,
    };
    let alternatives: Vec<Cons> = goal_cons.iter().flat_map(negate).collect();
    let n = p.vt.vars.len();
    let mut open_alts = Vec::new();
    for alt in alternatives {
        let mut s = initial_store(n);
        let mut cons = p.cons.clone();
        cons.push(alt.clone());
        if s.propagate(&cons).is_ok() {
            open_alts.push(alt);
        }
    }
    if open_alts.is_empty() {
        return EntailVerdict::Entailed;
    }
    for alt in open_alts {
        let mut q = Prepared {
            vt: p.vt.clone(),
            cons: p.cons.clone(),
            opaque: p.opaque.clone(),
            decided_false: false,
        };
        q.cons.push(alt);
        if let SatVerdict::Sat(w) = satisfiable_prepared(&q) {
            let vals: Vec<f64> = q
                .vt
                .vars
                .iter()
                .map(|v| w.get(v).and_then(Expr::as_num).unwrap_or(0.0))
                .collect();
            if !goal_cons.iter().all(|c| holds_at(c, &vals)) {
                return EntailVerdict::NotEntailed(w);
            }
        }
    }
    EntailVerdict::Unknown
}

/// Evaluates a ground numeric atom with the solver's tolerance.
pub fn ground_holds(a: &Atom) -> Option<bool> {
    opaque_holds(a, &Subst::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    fn n(x: f64) -> Expr {
        Expr::num(x)
    }

    fn le(a: Expr, b: Expr) -> Atom {
        Atom::holds(prim::LE, vec![a, b])
    }

    fn ge(a: Expr, b: Expr) -> Atom {
        Atom::holds(prim::GE, vec![a, b])
    }

    #[test]
    fn session_answer_box_is_satisfiable() {
        let cs = vec![le(v("W"), n(0.7)), ge(v("W"), n(0.65))];
        match satisfiable(&cs) {
            SatVerdict::Sat(w) => assert_eq!(w.get(&Var::new("W")), Some(&n(0.7))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_interval_is_unsat() {
        let cs = vec![le(v("W"), n(0.3)), ge(v("W"), n(0.5))];
        assert_eq!(satisfiable(&cs), SatVerdict::Unsat);
    }

    #[test]
    fn qval_witness_is_one() {
        let cs = vec![Atom::holds(prim::QVAL, vec![v("W")])];
        match satisfiable(&cs) {
            SatVerdict::Sat(w) => assert_eq!(w.get(&Var::new("W")), Some(&n(1.0))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example_one_entailment() {
        let pi = vec![Atom::holds(prim::LT, vec![v("A"), n(0.0)])];
        let goal = Atom::strict_neq(Expr::app(prim::MUL, vec![v("A"), v("A")]), n(0.0));
        assert_eq!(entails(&pi, &goal), EntailVerdict::Entailed);
    }

    #[test]
    fn ground_truth_is_entailed() {
        assert_eq!(entails(&[], &Atom::strict_eq(n(3.0), n(3.0))), EntailVerdict::Entailed);
    }

    #[test]
    fn counterexample_is_negative() {
        let pi = vec![Atom::holds(prim::LT, vec![v("A"), n(0.0)])];
        let goal = Atom::holds(prim::GT, vec![v("A"), n(0.0)]);
        match entails(&pi, &goal) {
            EntailVerdict::NotEntailed(w) => {
                let a = w.get(&Var::new("A")).and_then(Expr::as_num).unwrap();
                assert!(a < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chained_bounds_propagate() {
        let cs = vec![
            Atom::holds(prim::QVAL, vec![v("W")]),
            Atom::holds(prim::QVAL, vec![v("W1")]),
            le(v("W"), n(0.9)),
            ge(v("W"), n(0.65)),
            le(v("W"), Expr::app(prim::MUL, vec![n(0.7), v("W1")])),
        ];
        let Propagation::Boxes { boxes, .. } = propagate(&cs) else { panic!() };
        let w = boxes[&Var::new("W")];
        assert!((w.lo - 0.65).abs() < 1e-12 && (w.hi - 0.7).abs() < 1e-12);
        assert!(!w.lo_open && !w.hi_open);
        let cs2 = [cs, vec![ge(v("W"), n(0.8))]].concat();
        assert_eq!(propagate(&cs2), Propagation::Empty);
    }

    #[test]
    fn open_lower_bound_from_qval() {
        let cs = vec![
            Atom::holds(prim::QVAL, vec![v("W1")]),
            le(v("W"), Expr::app(prim::MUL, vec![n(0.8), v("W1")])),
            Atom::holds(prim::QVAL, vec![v("W")]),
        ];
        let Propagation::Boxes { boxes, .. } = propagate(&cs) else { panic!() };
        assert_eq!(boxes[&Var::new("W")].to_string(), "(0, 0.8]");
    }

    #[test]
    fn constructor_clash_is_decided() {
        let a = Expr::app("c", vec![v("X")]);
        let b = Expr::app("d", vec![]);
        assert_eq!(satisfiable(&[Atom::strict_eq(a.clone(), b.clone())]), SatVerdict::Unsat);
        assert_eq!(entails(&[], &Atom::strict_neq(a, b)), EntailVerdict::Entailed);
    }
}
