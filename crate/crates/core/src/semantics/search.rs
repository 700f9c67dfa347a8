//! Depth-bounded proof search for qualified statements.

use super::proof::{check_proof, ProofTree, Tag, Verdict};
use super::statement::{QcStatement, StatementBody};
use crate::engine::{with_stack, Engine, Flow, Reader, State};
use crate::program::Program;
use crate::qual::QualDomain;
use crate::solver::{self, EntailVerdict, SatVerdict};
use crate::term::Subst;

/// Outcome of [`holds`].
#[derive(Debug, Clone, PartialEq)]
pub enum HoldsVerdict {
    Derivable(ProofTree),
    NotFound,
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximal nesting of rule applications.
    pub depth: usize,
    /// Evaluation steps per deepening round.
    pub steps: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            depth: 24,
            steps: 2_000_000,
        }
    }
}

enum Round {
    Found(Box<ProofTree>),
    Exhausted,
    Cut,
}

/// Searches for a proof of `stmt` from `program`, deepening the rule nesting
/// bound one level at a time. Statement variables are treated as fixed.
pub fn holds(program: &Program, dom: &QualDomain, stmt: &QcStatement, limits: SearchLimits) -> HoldsVerdict {
    if let Some(d) = &stmt.qual {
        if !dom.is_usable(d) {
            return HoldsVerdict::NotFound;
        }
    }
    if stmt.is_trivial() {
        return HoldsVerdict::Derivable(ProofTree::leaf(Tag::Ti, stmt.clone()));
    }
    with_stack(|| {
        let mut unknown = None;
        for depth in 1..=limits.depth.max(1) {
            let engine = Engine::new(program, dom.clone(), stmt.pi.clone(), depth, limits.steps);
            let round = search_round(&engine, program, dom, stmt);
            if let Some(u) = engine.unknown() {
                unknown = Some(u);
            }
            match round {
                Round::Found(tree) => return HoldsVerdict::Derivable(*tree),
                Round::Exhausted => break,
                Round::Cut if engine.budget_hit.get() => {
                    unknown.get_or_insert_with(|| "step budget exhausted".to_string());
                    break;
                }
                Round::Cut if depth == limits.depth.max(1) => {
                    unknown.get_or_insert_with(|| format!("depth limit {depth} reached"));
                }
                Round::Cut => {}
            }
        }
        match unknown {
            Some(u) => HoldsVerdict::Unknown(u),
            None => HoldsVerdict::NotFound,
        }
    })
}

fn search_round(engine: &Engine, program: &Program, dom: &QualDomain, stmt: &QcStatement) -> Round {
    let mut st = State::default();
    for v in stmt.vars() {
        st.var(&v, true);
    }
    let mut found = None;
    let mut finish = |st: State, root: &dyn Fn(&Reader) -> ProofTree| -> Flow {
        let Some(w) = witness(engine, &st) else {
            return Flow::Continue;
        };
        let reader = Reader {
            engine,
            st: &st,
            w: Some(&w),
            pi: stmt.pi.clone(),
        };
        let tree = root(&reader);
        match check_proof(program, dom, &tree) {
            Verdict::Valid => {
                found = Some(tree);
                Flow::Stop
            }
            v => {
                engine.note_unknown(format!("candidate proof rejected: {v}"));
                Flow::Continue
            }
        }
    };
    let env = Vec::new();
    match &stmt.body {
        StatementBody::Production(e, t) => {
            let occ = engine.build(&mut st, e, &env, &stmt.qual);
            engine.match_term(st, occ.cell(), t, 0, &mut |st| {
                finish(st, &|r: &Reader| r.prove(occ, t, &stmt.qual))
            });
        }
        StatementBody::Atom(a) => {
            let rec = engine.build_cond(&mut st, a, &env, &stmt.qual);
            engine.solve_cond(st, &rec, 0, &mut |st| finish(st, &|r: &Reader| r.atom_proof(&rec, &stmt.qual)));
        }
    }
    match found {
        Some(t) => Round::Found(Box::new(t)),
        None if engine.depth_hit.get() || engine.budget_hit.get() => Round::Cut,
        None => Round::Exhausted,
    }
}

/// Values for the search variables left in the constraint store, such that
/// every remaining constraint follows from the hypotheses.
fn witness(engine: &Engine, st: &State) -> Option<Subst> {
    let store = engine.store_atoms(st, None);
    let w = if store.is_empty() {
        Subst::new()
    } else {
        match solver::satisfiable(&store) {
            SatVerdict::Sat(w) => w,
            SatVerdict::Unsat => return None,
            SatVerdict::Unknown => {
                engine.note_unknown("cannot find values for the search variables".into());
                return None;
            }
        }
    };
    for a in engine.diseq_atoms(st, Some(&w)) {
        match solver::entails(engine.hyps(), &a) {
            EntailVerdict::Entailed => {}
            EntailVerdict::NotEntailed(_) => return None,
            EntailVerdict::Unknown => {
                engine.note_unknown(format!("cannot decide `{a}`"));
                return None;
            }
        }
    }
    Some(w)
}
