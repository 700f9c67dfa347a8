//! Lazy narrowing over a heap of shared cells.
//!
//! Every expression built from a rule body becomes a cell; variables share
//! cells, so a call is evaluated at most once per occurrence. Backtracking
//! clones the persistent state. The same machinery drives proof search for
//! qualified statements (statement variables are rigid) and the solver for
//! translated goals (goal variables are free).

use std::cell::{Cell as Flag, RefCell};
use std::collections::HashMap;

use im::{HashMap as PMap, Vector};

use crate::prim::{self, EqOutcome};
use crate::program::{Program, Signature};
use crate::qual::{QualDomain, QualValue};
use crate::semantics::proof::{ProofTree, Tag};
use crate::semantics::statement::{instantiate_rule, QcStatement, StatementBody};
use crate::solver::{self, EntailVerdict, Propagation};
use crate::term::{Atom, Expr, Subst, Symbol, Var, FALSE, TRUE};

pub(crate) type CellId = usize;
pub(crate) type Need = Option<QualValue<f64>>;
pub(crate) type Env = Vec<(Var, CellId)>;

const STACK_BYTES: usize = 1 << 30;

/// Runs `f` on a thread with a stack large enough for deep searches.
pub(crate) fn with_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        let handle = std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("cannot spawn search thread");
        match handle.join() {
            Ok(r) => r,
            Err(e) => std::panic::resume_unwind(e),
        }
    })
}

/// How an expression position refers to its cell: a variable occurrence
/// reads back as the variable's value, a built cell as its own expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Occ {
    Var(CellId),
    Made(CellId),
}

impl Occ {
    pub(crate) fn cell(self) -> CellId {
        match self {
            Occ::Var(c) | Occ::Made(c) => c,
        }
    }
}

/// A built condition `p(args) == result`.
#[derive(Debug, Clone)]
pub(crate) struct CondRec {
    prim: Symbol,
    args: Vec<Occ>,
    result: Occ,
}

#[derive(Debug, Clone)]
struct CallRec {
    f: Symbol,
    args: Vec<Occ>,
    rule: usize,
    env: Env,
    rhs: Occ,
    conds: Vec<CondRec>,
}

#[derive(Debug, Clone)]
enum Cell {
    Bottom,
    Num(f64),
    Ctor(Symbol, Vec<Occ>),
    Rigid(Var),
    Free(Var),
    Ref(CellId),
    /// Arithmetic over unbound variables.
    Sym(Expr),
    /// `at` is the rule nesting the call was built under.
    Thunk { f: Symbol, args: Vec<Occ>, need: Need, at: usize },
    Called(Box<CallRec>),
    PrimDone { p: Symbol, args: Vec<Occ>, result: CellId },
}

#[derive(Clone, Default)]
pub(crate) struct State {
    cells: Vector<Cell>,
    store: Vector<Atom>,
    diseqs: Vector<(CellId, CellId)>,
    names: PMap<Var, CellId>,
}

impl State {
    fn push(&mut self, c: Cell) -> CellId {
        self.cells.push_back(c);
        self.cells.len() - 1
    }

    fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id]
    }

    fn set(&mut self, id: CellId, c: Cell) {
        self.cells.set(id, c);
    }

    fn deref(&self, mut id: CellId) -> CellId {
        loop {
            id = match &self.cells[id] {
                Cell::Ref(i) | Cell::PrimDone { result: i, .. } => *i,
                Cell::Called(c) => c.rhs.cell(),
                _ => return id,
            };
        }
    }

    /// The cell of a named variable, created on first use.
    pub(crate) fn var(&mut self, v: &Var, rigid: bool) -> CellId {
        if let Some(&id) = self.names.get(v) {
            return id;
        }
        let id = self.push(if rigid { Cell::Rigid(v.clone()) } else { Cell::Free(v.clone()) });
        self.names.insert(v.clone(), id);
        id
    }

    fn fresh(&mut self) -> CellId {
        let v = Var::new(&format!("$V{}", self.cells.len()));
        self.var(&v, false)
    }

    fn is_free_var(&self, v: &Var) -> bool {
        matches!(self.names.get(v).map(|&i| self.cell(i)), Some(Cell::Free(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

pub(crate) enum Fail {
    Clash,
    Unknown(String),
}

type Step = Result<State, Fail>;
type K<'a> = &'a mut dyn FnMut(State) -> Flow;
type KV<'a> = &'a mut dyn FnMut(State, CellId) -> Flow;
type KS<'a> = &'a mut dyn FnMut(State, Vec<CellId>) -> Flow;
type KE<'a> = &'a mut dyn FnMut(State, Env) -> Flow;

fn bool_cell(st: &mut State, b: bool) -> CellId {
    st.push(Cell::Ctor(Symbol::new(if b { TRUE } else { FALSE }), Vec::new()))
}

/// Evaluates arithmetic whose arguments have become numbers.
fn fold_arith(e: Expr) -> Expr {
    match e {
        Expr::App(p, args) if prim::is_arithmetic(p.as_str()) => {
            let args: Vec<Expr> = args.into_iter().map(fold_arith).collect();
            match (args[0].as_num(), args.get(1).and_then(Expr::as_num)) {
                (Some(x), Some(y)) => match prim::apply_arith(p.as_str(), x, y) {
                    Some(r) => Expr::num(r),
                    None => Expr::App(p, args),
                },
                _ => Expr::App(p, args),
            }
        }
        e => e,
    }
}

pub(crate) struct Engine<'p> {
    program: &'p Program,
    sig: Signature,
    rules: HashMap<Symbol, Vec<usize>>,
    dom: QualDomain,
    hyps: Vec<Atom>,
    depth_limit: usize,
    steps_left: Flag<usize>,
    pub(crate) depth_hit: Flag<bool>,
    pub(crate) budget_hit: Flag<bool>,
    unknown: RefCell<Option<String>>,
}

impl<'p> Engine<'p> {
    pub(crate) fn new(program: &'p Program, dom: QualDomain, hyps: Vec<Atom>, depth_limit: usize, steps: usize) -> Self {
        let mut rules: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (i, r) in program.rules.iter().enumerate() {
            rules.entry(r.head.clone()).or_default().push(i);
        }
        Engine {
            program,
            sig: program.signature(),
            rules,
            dom,
            hyps,
            depth_limit,
            steps_left: Flag::new(steps),
            depth_hit: Flag::new(false),
            budget_hit: Flag::new(false),
            unknown: RefCell::new(None),
        }
    }

    pub(crate) fn hyps(&self) -> &[Atom] {
        &self.hyps
    }

    pub(crate) fn unknown(&self) -> Option<String> {
        self.unknown.borrow().clone()
    }

    pub(crate) fn note_unknown(&self, msg: String) {
        log::debug!("unknown: {msg}");
        self.unknown.borrow_mut().get_or_insert(msg);
    }

    fn failed(&self, f: Fail) -> Flow {
        if let Fail::Unknown(msg) = f {
            self.note_unknown(msg);
        }
        Flow::Continue
    }

    fn tick(&self) -> bool {
        let s = self.steps_left.get();
        if s == 0 {
            self.budget_hit.set(true);
            return false;
        }
        self.steps_left.set(s - 1);
        true
    }

    pub(crate) fn build(&self, st: &mut State, e: &Expr, env: &Env, need: &Need) -> Occ {
        self.build_at(st, e, env, need, 0)
    }

    fn build_at(&self, st: &mut State, e: &Expr, env: &Env, need: &Need, at: usize) -> Occ {
        match e {
            Expr::Var(v) => Occ::Var(match env.iter().find(|(w, _)| w == v) {
                Some((_, c)) => *c,
                None => st.var(v, false),
            }),
            Expr::Num(x) => Occ::Made(st.push(Cell::Num(*x))),
            Expr::Bottom => Occ::Made(st.push(Cell::Bottom)),
            Expr::App(f, args) => {
                let args: Vec<Occ> = args.iter().map(|a| self.build_at(st, a, env, need, at)).collect();
                let cell = if self.sig.is_ctor(f) {
                    Cell::Ctor(f.clone(), args)
                } else {
                    Cell::Thunk {
                        f: f.clone(),
                        args,
                        need: need.clone(),
                        at,
                    }
                };
                Occ::Made(st.push(cell))
            }
        }
    }

    pub(crate) fn build_cond(&self, st: &mut State, a: &Atom, env: &Env, need: &Need) -> CondRec {
        self.build_cond_at(st, a, env, need, 0)
    }

    fn build_cond_at(&self, st: &mut State, a: &Atom, env: &Env, need: &Need, at: usize) -> CondRec {
        CondRec {
            prim: a.prim.clone(),
            args: a.args.iter().map(|e| self.build_at(st, e, env, need, at)).collect(),
            result: self.build_at(st, &a.result, env, need, at),
        }
    }

    fn whnf(&self, st: State, id: CellId, depth: usize, k: KV) -> Flow {
        if !self.tick() {
            return Flow::Stop;
        }
        let id = st.deref(id);
        match st.cell(id).clone() {
            Cell::Thunk { f, args, need, at } => {
                let depth = depth.max(at);
                if prim::is_primitive(f.as_str()) {
                    self.prim_value(st, &f, &args, depth, &mut |mut st, r| {
                        st.set(
                            id,
                            Cell::PrimDone {
                                p: f.clone(),
                                args: args.clone(),
                                result: r,
                            },
                        );
                        k(st, r)
                    })
                } else {
                    self.call(st, id, &f, &args, &need, depth, k)
                }
            }
            Cell::Bottom => Flow::Continue,
            _ => k(st, id),
        }
    }

    fn whnf_list(&self, st: State, ids: &[CellId], acc: Vec<CellId>, depth: usize, k: KS) -> Flow {
        match ids.split_first() {
            None => k(st, acc),
            Some((&id, rest)) => self.whnf(st, id, depth, &mut |st, h| {
                let mut acc = acc.clone();
                acc.push(h);
                self.whnf_list(st, rest, acc, depth, &mut *k)
            }),
        }
    }

    /// Full normal form, as strict equality needs.
    fn nf(&self, st: State, id: CellId, depth: usize, k: KV) -> Flow {
        self.whnf(st, id, depth, &mut |st, h| match st.cell(h).clone() {
            Cell::Ctor(_, kids) => {
                let ids: Vec<CellId> = kids.iter().map(|o| o.cell()).collect();
                self.nf_list(st, &ids, depth, &mut |st| k(st, h))
            }
            _ => k(st, h),
        })
    }

    fn nf_list(&self, st: State, ids: &[CellId], depth: usize, k: K) -> Flow {
        match ids.split_first() {
            None => k(st),
            Some((&id, rest)) => self.nf(st, id, depth, &mut |st, _| self.nf_list(st, rest, depth, &mut *k)),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn call(&self, st: State, id: CellId, f: &Symbol, args: &[Occ], need: &Need, depth: usize, k: KV) -> Flow {
        if depth >= self.depth_limit {
            self.depth_hit.set(true);
            return Flow::Continue;
        }
        let Some(rules) = self.rules.get(f) else {
            return Flow::Continue;
        };
        for &ri in rules {
            let rule = &self.program.rules[ri];
            let sub = match need {
                None => None,
                Some(d) => match self.dom.residual(d, &rule.alpha) {
                    Some(r) if self.dom.is_usable(&r) => Some(r),
                    _ => continue,
                },
            };
            log::trace!("depth {depth}: trying rule {} for {f}", ri + 1);
            if self.apply(st.clone(), id, f, args, ri, &sub, depth + 1, k) == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(&self, st: State, id: CellId, f: &Symbol, args: &[Occ], ri: usize, sub: &Need, depth: usize, k: KV) -> Flow {
        let rule = &self.program.rules[ri];
        let cells: Vec<CellId> = args.iter().map(|o| o.cell()).collect();
        self.match_list(st, &rule.params, &cells, Vec::new(), depth, &mut |mut st, mut env| {
            for v in rule.vars() {
                if !env.iter().any(|(w, _)| *w == v) {
                    let c = st.fresh();
                    env.push((v, c));
                }
            }
            let conds: Vec<CondRec> = rule.conds.iter().map(|a| self.build_cond_at(&mut st, a, &env, sub, depth)).collect();
            self.solve_conds(st, &conds, depth, &mut |mut st| {
                let rhs = self.build_at(&mut st, &rule.rhs, &env, sub, depth);
                st.set(
                    id,
                    Cell::Called(Box::new(CallRec {
                        f: f.clone(),
                        args: args.to_vec(),
                        rule: ri,
                        env: env.clone(),
                        rhs,
                        conds: conds.clone(),
                    })),
                );
                self.whnf(st, rhs.cell(), depth, &mut *k)
            })
        })
    }

    fn match_list(&self, st: State, pats: &[Expr], ids: &[CellId], env: Env, depth: usize, k: KE) -> Flow {
        match pats.split_first() {
            None => k(st, env),
            Some((p, rest)) => self.match_pat(st, p, ids[0], env, depth, &mut |st, env| {
                self.match_list(st, rest, &ids[1..], env, depth, &mut *k)
            }),
        }
    }

    fn match_pat(&self, st: State, pat: &Expr, id: CellId, mut env: Env, depth: usize, k: KE) -> Flow {
        match pat {
            Expr::Var(v) => {
                env.push((v.clone(), id));
                k(st, env)
            }
            Expr::Bottom => Flow::Continue,
            Expr::Num(x) => self.whnf(st, id, depth, &mut |mut st, h| {
                let n = st.push(Cell::Num(*x));
                match self.unify(st, h, n) {
                    Ok(st) => k(st, env.clone()),
                    Err(e) => self.failed(e),
                }
            }),
            Expr::App(c, ps) => self.whnf(st, id, depth, &mut |mut st, h| match st.cell(h).clone() {
                Cell::Ctor(c2, kids) if c2 == *c && kids.len() == ps.len() => {
                    let ids: Vec<CellId> = kids.iter().map(|o| o.cell()).collect();
                    self.match_list(st, ps, &ids, env.clone(), depth, &mut *k)
                }
                Cell::Free(_) => {
                    let ids: Vec<CellId> = ps.iter().map(|_| st.fresh()).collect();
                    let t = st.push(Cell::Ctor(c.clone(), ids.iter().map(|&i| Occ::Var(i)).collect()));
                    match self.bind(st, h, t) {
                        Ok(st) => self.match_list(st, ps, &ids, env.clone(), depth, &mut *k),
                        Err(e) => self.failed(e),
                    }
                }
                _ => Flow::Continue,
            }),
        }
    }

    pub(crate) fn solve_conds(&self, st: State, conds: &[CondRec], depth: usize, k: K) -> Flow {
        match conds.split_first() {
            None => k(st),
            Some((c, rest)) => self.solve_cond(st, c, depth, &mut |st| self.solve_conds(st, rest, depth, &mut *k)),
        }
    }

    pub(crate) fn solve_cond(&self, st: State, c: &CondRec, depth: usize, k: K) -> Flow {
        self.prim_value(st, &c.prim, &c.args, depth, &mut |st, r| {
            self.nf(st, c.result.cell(), depth, &mut |st, v| match self.unify(st, r, v) {
                Ok(st) => k(st),
                Err(e) => self.failed(e),
            })
        })
    }

    /// Production `e -> t` against a target term whose variables are rigid.
    pub(crate) fn match_term(&self, st: State, id: CellId, t: &Expr, depth: usize, k: K) -> Flow {
        match t {
            Expr::Bottom => k(st),
            Expr::App(c, ts) => self.whnf(st, id, depth, &mut |mut st, h| match st.cell(h).clone() {
                Cell::Ctor(c2, kids) if c2 == *c && kids.len() == ts.len() => {
                    let ids: Vec<CellId> = kids.iter().map(|o| o.cell()).collect();
                    self.match_terms(st, &ids, ts, depth, &mut *k)
                }
                Cell::Free(_) => {
                    let ids: Vec<CellId> = ts.iter().map(|_| st.fresh()).collect();
                    let cell = st.push(Cell::Ctor(c.clone(), ids.iter().map(|&i| Occ::Var(i)).collect()));
                    match self.bind(st, h, cell) {
                        Ok(st) => self.match_terms(st, &ids, ts, depth, &mut *k),
                        Err(e) => self.failed(e),
                    }
                }
                _ => Flow::Continue,
            }),
            _ => self.whnf(st, id, depth, &mut |mut st, h| {
                let target = match t {
                    Expr::Var(v) => st.var(v, true),
                    _ => st.push(Cell::Num(t.as_num().unwrap_or(0.0))),
                };
                match self.unify(st, h, target) {
                    Ok(st) => k(st),
                    Err(e) => self.failed(e),
                }
            }),
        }
    }

    fn match_terms(&self, st: State, ids: &[CellId], ts: &[Expr], depth: usize, k: K) -> Flow {
        match ids.split_first() {
            None => k(st),
            Some((&id, rest)) => self.match_term(st, id, &ts[0], depth, &mut |st| {
                self.match_terms(st, rest, &ts[1..], depth, &mut *k)
            }),
        }
    }

    /// Evaluates `p(args)` to a fresh result cell, branching on the truth
    /// value when a comparison or equality is not yet decided.
    fn prim_value(&self, st: State, p: &Symbol, args: &[Occ], depth: usize, k: KV) -> Flow {
        let name = p.as_str();
        let ids: Vec<CellId> = args.iter().map(|o| o.cell()).collect();
        if name == prim::EQ {
            return self.nf(st, ids[0], depth, &mut |st, a| {
                self.nf(st, ids[1], depth, &mut |st, b| match self.decide_eq(&st, a, b) {
                    EqOutcome::Equal => {
                        let mut st = st;
                        let r = bool_cell(&mut st, true);
                        k(st, r)
                    }
                    EqOutcome::Clash => {
                        let mut st = st;
                        let r = bool_cell(&mut st, false);
                        k(st, r)
                    }
                    EqOutcome::Undecided => {
                        for (b_val, step) in [(true, self.unify(st.clone(), a, b)), (false, self.disunify(st.clone(), a, b))] {
                            match step {
                                Ok(mut st) => {
                                    let r = bool_cell(&mut st, b_val);
                                    if k(st, r) == Flow::Stop {
                                        return Flow::Stop;
                                    }
                                }
                                Err(e) => {
                                    self.failed(e);
                                }
                            }
                        }
                        Flow::Continue
                    }
                })
            });
        }
        self.whnf_list(st, &ids, Vec::new(), depth, &mut |mut st, hs| {
            let mut nums = Vec::new();
            for &h in &hs {
                match st.cell(h) {
                    Cell::Num(x) => nums.push(Expr::num(*x)),
                    Cell::Ctor(..) | Cell::Bottom => return Flow::Continue,
                    _ => {}
                }
            }
            if nums.len() == hs.len() {
                let v = match prim::eval_primitive(p, &nums) {
                    Ok(v) => v,
                    Err(e) => return self.failed(Fail::Unknown(e.to_string())),
                };
                let r = match v {
                    Expr::Num(x) => st.push(Cell::Num(x)),
                    Expr::App(..) => bool_cell(&mut st, v.as_bool() == Some(true)),
                    _ => return Flow::Continue,
                };
                return k(st, r);
            }
            let syms: Vec<Expr> = hs.iter().map(|&h| self.term(&st, h, None)).collect();
            if prim::is_arithmetic(name) {
                let r = st.push(Cell::Sym(Expr::App(p.clone(), syms)));
                return k(st, r);
            }
            for b in [true, false] {
                let atom = Atom {
                    prim: p.clone(),
                    args: syms.clone(),
                    result: Expr::bool(b),
                };
                match self.post(st.clone(), atom) {
                    Ok(mut st) => {
                        let r = bool_cell(&mut st, b);
                        if k(st, r) == Flow::Stop {
                            return Flow::Stop;
                        }
                    }
                    Err(e) => {
                        self.failed(e);
                    }
                }
            }
            Flow::Continue
        })
    }

    /// Structural comparison of normal forms.
    fn decide_eq(&self, st: &State, a: CellId, b: CellId) -> EqOutcome {
        let (a, b) = (st.deref(a), st.deref(b));
        if a == b {
            return EqOutcome::Equal;
        }
        match (st.cell(a), st.cell(b)) {
            (Cell::Num(x), Cell::Num(y)) => {
                if x == y {
                    EqOutcome::Equal
                } else {
                    EqOutcome::Clash
                }
            }
            (Cell::Ctor(c, xs), Cell::Ctor(d, ys)) => {
                if c != d || xs.len() != ys.len() {
                    return EqOutcome::Clash;
                }
                let mut out = EqOutcome::Equal;
                for (x, y) in xs.iter().zip(ys) {
                    match self.decide_eq(st, x.cell(), y.cell()) {
                        EqOutcome::Clash => return EqOutcome::Clash,
                        EqOutcome::Undecided => out = EqOutcome::Undecided,
                        EqOutcome::Equal => {}
                    }
                }
                out
            }
            (Cell::Ctor(..), Cell::Num(_) | Cell::Sym(_)) | (Cell::Num(_) | Cell::Sym(_), Cell::Ctor(..)) => EqOutcome::Clash,
            _ => EqOutcome::Undecided,
        }
    }

    fn occurs(&self, st: &State, v: CellId, id: CellId) -> bool {
        let id = st.deref(id);
        if id == v {
            return true;
        }
        match st.cell(id) {
            Cell::Ctor(_, kids) => kids.iter().any(|o| self.occurs(st, v, o.cell())),
            _ => false,
        }
    }

    fn bind(&self, mut st: State, v: CellId, target: CellId) -> Step {
        if self.occurs(&st, v, target) {
            return Err(Fail::Clash);
        }
        st.set(v, Cell::Ref(target));
        let st = self.check_diseqs(st)?;
        self.check_store(st)
    }

    /// Strict equality between normal forms.
    fn unify(&self, st: State, a: CellId, b: CellId) -> Step {
        let (a, b) = (st.deref(a), st.deref(b));
        if a == b {
            return Ok(st);
        }
        match (st.cell(a).clone(), st.cell(b).clone()) {
            (Cell::Free(_), _) => self.bind(st, a, b),
            (_, Cell::Free(_)) => self.bind(st, b, a),
            (Cell::Num(x), Cell::Num(y)) => {
                if x == y {
                    Ok(st)
                } else {
                    Err(Fail::Clash)
                }
            }
            (Cell::Ctor(c, xs), Cell::Ctor(d, ys)) => {
                if c != d || xs.len() != ys.len() {
                    return Err(Fail::Clash);
                }
                xs.iter()
                    .zip(&ys)
                    .try_fold(st, |st, (x, y)| self.unify(st, x.cell(), y.cell()))
            }
            (Cell::Ctor(..), Cell::Num(_) | Cell::Sym(_)) | (Cell::Num(_) | Cell::Sym(_), Cell::Ctor(..)) => Err(Fail::Clash),
            _ => {
                let atom = Atom::strict_eq(self.term(&st, a, None), self.term(&st, b, None));
                self.post(st, atom)
            }
        }
    }

    fn disunify(&self, mut st: State, a: CellId, b: CellId) -> Step {
        match self.decide_eq(&st, a, b) {
            EqOutcome::Clash => Ok(st),
            EqOutcome::Equal => Err(Fail::Clash),
            EqOutcome::Undecided => {
                let numeric = |id: CellId| matches!(st.cell(st.deref(id)), Cell::Sym(_) | Cell::Rigid(_));
                if numeric(a) || numeric(b) {
                    let atom = Atom::strict_neq(self.term(&st, a, None), self.term(&st, b, None));
                    return self.post(st, atom);
                }
                st.diseqs.push_back((a, b));
                Ok(st)
            }
        }
    }

    fn check_diseqs(&self, mut st: State) -> Step {
        let mut keep = Vector::new();
        for &(a, b) in st.diseqs.iter() {
            match self.decide_eq(&st, a, b) {
                EqOutcome::Equal => return Err(Fail::Clash),
                EqOutcome::Clash => {}
                EqOutcome::Undecided => keep.push_back((a, b)),
            }
        }
        st.diseqs = keep;
        Ok(st)
    }

    /// Adds a primitive constraint. Constraints over rigid variables only
    /// must follow from the hypotheses; the rest join the interval store.
    fn post(&self, mut st: State, a: Atom) -> Step {
        let a = self.resolve_atom(&st, &a, None);
        let vars = a.vars();
        let has_free = vars.iter().any(|v| st.is_free_var(v));
        if !has_free {
            return match solver::entails(&self.hyps, &a) {
                EntailVerdict::Entailed => Ok(st),
                EntailVerdict::NotEntailed(_) => Err(Fail::Clash),
                EntailVerdict::Unknown => Err(Fail::Unknown(format!("cannot decide `{a}`"))),
            };
        }
        if vars.iter().any(|v| !st.is_free_var(v)) {
            return Err(Fail::Unknown(format!("`{a}` mixes hypothesis and search variables")));
        }
        st.store.push_back(a);
        self.check_store(st)
    }

    fn check_store(&self, st: State) -> Step {
        if st.store.is_empty() {
            return Ok(st);
        }
        let atoms = self.store_atoms(&st, None);
        match solver::propagate(&atoms) {
            Propagation::Empty => Err(Fail::Clash),
            Propagation::Boxes { .. } => Ok(st),
        }
    }

    pub(crate) fn store_atoms(&self, st: &State, w: Option<&Subst>) -> Vec<Atom> {
        st.store.iter().map(|a| self.resolve_atom(st, a, w)).collect()
    }

    /// Remaining disequalities as `(a == b) == false` atoms.
    pub(crate) fn diseq_atoms(&self, st: &State, w: Option<&Subst>) -> Vec<Atom> {
        st.diseqs
            .iter()
            .map(|&(a, b)| Atom::strict_neq(self.term(st, a, w), self.term(st, b, w)))
            .collect()
    }

    fn resolve(&self, st: &State, e: &Expr, w: Option<&Subst>) -> Expr {
        match e {
            Expr::Var(v) => match st.names.get(v) {
                Some(&id) => self.term(st, id, w),
                None => e.clone(),
            },
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| self.resolve(st, a, w)).collect()),
            _ => e.clone(),
        }
    }

    fn resolve_atom(&self, st: &State, a: &Atom, w: Option<&Subst>) -> Atom {
        Atom {
            prim: a.prim.clone(),
            args: a.args.iter().map(|e| self.resolve(st, e, w)).collect(),
            result: self.resolve(st, &a.result, w),
        }
    }

    /// The partial term a cell currently denotes; free variables are read
    /// through the witness `w` when one is given.
    pub(crate) fn term(&self, st: &State, id: CellId, w: Option<&Subst>) -> Expr {
        let id = st.deref(id);
        match st.cell(id) {
            Cell::Bottom | Cell::Thunk { .. } => Expr::Bottom,
            Cell::Num(x) => Expr::num(*x),
            Cell::Ctor(c, kids) => Expr::App(c.clone(), kids.iter().map(|o| self.term(st, o.cell(), w)).collect()),
            Cell::Rigid(v) => Expr::Var(v.clone()),
            Cell::Free(v) => w.and_then(|w| w.get(v)).cloned().unwrap_or_else(|| Expr::Var(v.clone())),
            Cell::Sym(e) => fold_arith(self.resolve(st, e, w)),
            Cell::Ref(_) | Cell::Called(_) | Cell::PrimDone { .. } => unreachable!("dereferenced cell"),
        }
    }

    /// Whether the named variable is still unbound.
    pub(crate) fn is_unbound(&self, st: &State, v: &Var) -> bool {
        match st.names.get(v) {
            Some(&id) => matches!(st.cell(st.deref(id)), Cell::Free(_) | Cell::Rigid(_)),
            None => true,
        }
    }

    pub(crate) fn var_term(&self, st: &State, v: &Var, w: Option<&Subst>) -> Expr {
        match st.names.get(v) {
            Some(&id) => self.term(st, id, w),
            None => Expr::Var(v.clone()),
        }
    }
}

/// Reads a successful search state back as proof trees.
pub(crate) struct Reader<'a, 'p> {
    pub(crate) engine: &'a Engine<'p>,
    pub(crate) st: &'a State,
    pub(crate) w: Option<&'a Subst>,
    pub(crate) pi: Vec<Atom>,
}

impl Reader<'_, '_> {
    fn value(&self, id: CellId) -> Expr {
        self.engine.term(self.st, id, self.w)
    }

    fn expr(&self, occ: Occ) -> Expr {
        match occ {
            Occ::Var(c) => self.value(c),
            Occ::Made(c) => match self.st.cell(c) {
                Cell::Num(x) => Expr::num(*x),
                Cell::Bottom => Expr::Bottom,
                Cell::Ctor(f, args) | Cell::Thunk { f, args, .. } | Cell::PrimDone { p: f, args, .. } => {
                    Expr::App(f.clone(), args.iter().map(|o| self.expr(*o)).collect())
                }
                Cell::Called(c) => Expr::App(c.f.clone(), c.args.iter().map(|o| self.expr(*o)).collect()),
                _ => self.value(c),
            },
        }
    }

    fn stmt(&self, body: StatementBody, q: &Need) -> QcStatement {
        QcStatement {
            body,
            qual: q.clone(),
            pi: self.pi.clone(),
        }
    }

    fn leaf(&self, tag: Tag, e: Expr, t: Expr, q: &Need) -> ProofTree {
        ProofTree::leaf(tag, self.stmt(StatementBody::Production(e, t), q))
    }

    /// Proof of `expr(occ) -> target`, where `target` approximates the
    /// cell's value.
    pub(crate) fn prove(&self, occ: Occ, target: &Expr, q: &Need) -> ProofTree {
        let e = self.expr(occ);
        if target.is_bottom() {
            return self.leaf(Tag::Ti, e, Expr::Bottom, q);
        }
        match occ {
            Occ::Var(_) => self.term_proof(&e, target, q),
            Occ::Made(c) => self.cell_proof(c, e, target, q),
        }
    }

    fn term_proof(&self, e: &Expr, t: &Expr, q: &Need) -> ProofTree {
        match (e, t) {
            (_, Expr::Bottom) => self.leaf(Tag::Ti, e.clone(), Expr::Bottom, q),
            (Expr::App(_, es), Expr::App(_, ts)) if es.len() == ts.len() => {
                let kids = es.iter().zip(ts).map(|(a, b)| self.term_proof(a, b, q)).collect();
                ProofTree::node(Tag::Dc, self.stmt(StatementBody::Production(e.clone(), t.clone()), q), kids)
            }
            _ => self.leaf(Tag::Rr, e.clone(), t.clone(), q),
        }
    }

    fn cell_proof(&self, id: CellId, e: Expr, target: &Expr, q: &Need) -> ProofTree {
        let conclusion = self.stmt(StatementBody::Production(e.clone(), target.clone()), q);
        match self.st.cell(id) {
            Cell::Ctor(_, kids) => {
                let ts: Vec<Expr> = match target {
                    Expr::App(_, ts) if ts.len() == kids.len() => ts.clone(),
                    _ => kids.iter().map(|o| self.value(o.cell())).collect(),
                };
                let children = kids.iter().zip(&ts).map(|(o, t)| self.prove(*o, t, q)).collect();
                ProofTree::node(Tag::Dc, conclusion, children)
            }
            Cell::Called(c) => {
                let rule = &self.engine.program.rules[c.rule];
                let theta: Subst = c.env.iter().map(|(v, id)| (v.clone(), self.value(*id))).collect();
                let inst = instantiate_rule(rule, &theta);
                let mut children: Vec<ProofTree> =
                    c.args.iter().zip(&inst.params).map(|(o, p)| self.prove(*o, p, q)).collect();
                let sub = match q {
                    None => None,
                    Some(d) => self.engine.dom.residual(d, &rule.alpha),
                };
                children.push(self.prove(c.rhs, target, &sub));
                children.extend(c.conds.iter().map(|r| self.atom_proof(r, &sub)));
                ProofTree {
                    tag: Tag::Df,
                    conclusion,
                    children,
                    rule: Some(c.rule),
                    theta,
                }
            }
            Cell::PrimDone { args, .. } => {
                let children = args.iter().map(|o| self.prove(*o, &self.value(o.cell()), q)).collect();
                ProofTree::node(Tag::Pf, conclusion, children)
            }
            Cell::Num(_) => ProofTree::leaf(Tag::Rr, conclusion),
            _ => self.term_proof(&e, target, q),
        }
    }

    /// Proof of a built condition `p(args) == result`.
    pub(crate) fn atom_proof(&self, rec: &CondRec, q: &Need) -> ProofTree {
        let atom = Atom {
            prim: rec.prim.clone(),
            args: rec.args.iter().map(|o| self.expr(*o)).collect(),
            result: self.expr(rec.result),
        };
        let children = rec.args.iter().map(|o| self.prove(*o, &self.value(o.cell()), q)).collect();
        ProofTree::node(Tag::Ac, self.stmt(StatementBody::Atom(atom), q), children)
    }
}
