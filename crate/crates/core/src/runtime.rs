//! Goal solving by constrained narrowing over translated programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::engine::{with_stack, Engine, Flow, Reader, State};
use crate::error::Result;
use crate::program::{CflpGoal, Goal, Program};
use crate::qual::QualDomain;
use crate::semantics::proof::{check_proof, ProofTree, Verdict};
use crate::solver::{self, Interval, Propagation, SatVerdict};
use crate::term::{Atom, Subst, Var};
use crate::transform::{self, Transformer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    /// Maximal nesting of rule applications.
    pub depth: usize,
    /// Deepen the nesting bound from 1 up to `depth`.
    pub deepen: bool,
    pub steps: usize,
    pub answers: Option<usize>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            depth: 24,
            deepen: false,
            steps: 2_000_000,
            answers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// Some branch was cut by the depth or step limit before this answer.
    pub incomplete: bool,
    /// The residual constraints could not be shown satisfiable.
    pub conditional: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.incomplete || self.conditional
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub subst: Subst,
    /// One interval per component of each qualification variable.
    pub qual: Vec<(Var, Vec<Interval>)>,
    pub residual: Vec<Atom>,
    pub flags: Flags,
    /// Proofs of the goal atoms under a witness of the residual.
    pub proofs: Vec<ProofTree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solutions {
    pub answers: Vec<Answer>,
    /// The search space was explored completely.
    pub complete: bool,
    pub note: Option<String>,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subst: Vec<String> = self.subst.iter().map(|(v, e)| format!("{v} -> {e}")).collect();
        write!(f, "{{ {} }}", subst.join(", "))?;
        if !self.qual.is_empty() {
            let qual: Vec<String> = self
                .qual
                .iter()
                .map(|(v, is)| match is.as_slice() {
                    [i] => format!("{v} in {i}"),
                    is => format!("{v} in ({})", is.iter().map(Interval::to_string).collect::<Vec<_>>().join(", ")),
                })
                .collect();
            write!(f, " {{ {} }}", qual.join(", "))?;
        }
        if !self.residual.is_empty() {
            let res: Vec<String> = self.residual.iter().map(Atom::to_string).collect();
            write!(f, " {{ {} }}", res.join(", "))?;
        }
        let mut flags = Vec::new();
        if self.flags.incomplete {
            flags.push("incomplete");
        }
        if self.flags.conditional {
            flags.push("conditional");
        }
        if !flags.is_empty() {
            write!(f, " [{}]", flags.join(", "))?;
        }
        Ok(())
    }
}

/// What to report for a goal: plain variables, and qualification variables
/// with their component variables.
struct View {
    keep: Vec<Var>,
    qual: Vec<(Var, Vec<Var>)>,
    hidden: BTreeSet<Var>,
}

impl View {
    fn plain(goal: &CflpGoal) -> Self {
        View {
            keep: goal.vars().into_iter().filter(|v| !v.as_str().starts_with('$')).collect(),
            qual: Vec::new(),
            hidden: BTreeSet::new(),
        }
    }

    /// Constraints over internal and qualification variables only.
    fn is_qual_only(&self, a: &Atom) -> bool {
        a.vars()
            .iter()
            .all(|v| self.hidden.contains(v) || v.as_str().starts_with('$'))
    }
}

/// Solves a goal of a qualification-free program.
pub fn solve(program: &Program, goal: &CflpGoal, limits: &SolveLimits) -> Solutions {
    run(program, goal, &View::plain(goal), limits)
}

fn run(program: &Program, goal: &CflpGoal, view: &View, limits: &SolveLimits) -> Solutions {
    with_stack(|| {
        let mut out = Solutions {
            answers: Vec::new(),
            complete: false,
            note: None,
        };
        let mut seen = BTreeSet::new();
        let depths: Vec<usize> = if limits.deepen {
            (1..=limits.depth.max(1)).collect()
        } else {
            vec![limits.depth.max(1)]
        };
        for depth in depths {
            let engine = Engine::new(program, QualDomain::U, Vec::new(), depth, limits.steps);
            let full = round(&engine, program, goal, view, limits, &mut out.answers, &mut seen);
            let cut = engine.depth_hit.get() || engine.budget_hit.get();
            out.note = engine.unknown();
            if engine.budget_hit.get() {
                out.note = Some("step budget exhausted".into());
            } else if engine.depth_hit.get() && out.note.is_none() {
                out.note = Some(format!("depth limit {depth} reached"));
            }
            if full || !cut || engine.budget_hit.get() {
                out.complete = !cut && !full && out.note.is_none();
                break;
            }
        }
        out
    })
}

/// One depth-first pass; true when the answer limit was reached.
fn round(
    engine: &Engine,
    program: &Program,
    goal: &CflpGoal,
    view: &View,
    limits: &SolveLimits,
    answers: &mut Vec<Answer>,
    seen: &mut BTreeSet<String>,
) -> bool {
    let mut st = State::default();
    for v in goal.vars() {
        st.var(&v, false);
    }
    let recs: Vec<_> = goal
        .atoms
        .iter()
        .map(|a| engine.build_cond(&mut st, a, &Vec::new(), &None))
        .collect();
    let mut full = false;
    engine.solve_conds(st, &recs, 0, &mut |st| {
        let Some(answer) = read_answer(engine, program, &st, view, &recs) else {
            return Flow::Continue;
        };
        if seen.insert(answer.to_string().replace(" [incomplete]", "")) {
            log::debug!("answer {answer}");
            answers.push(answer);
            if limits.answers.is_some_and(|n| answers.len() >= n) {
                full = true;
                return Flow::Stop;
            }
        }
        Flow::Continue
    });
    full
}

fn read_answer(
    engine: &Engine,
    program: &Program,
    st: &State,
    view: &View,
    recs: &[crate::engine::CondRec],
) -> Option<Answer> {
    let store = engine.store_atoms(st, None);
    let mut flags = Flags {
        incomplete: engine.depth_hit.get() || engine.budget_hit.get(),
        conditional: false,
    };
    let witness = match solver::satisfiable(&store) {
        SatVerdict::Sat(w) => Some(w),
        SatVerdict::Unsat => return None,
        SatVerdict::Unknown => {
            flags.conditional = true;
            None
        }
    };
    let boxes = match solver::propagate(&store) {
        Propagation::Empty => return None,
        Propagation::Boxes { boxes, .. } => boxes,
    };
    let mut subst = Subst::new();
    for v in &view.keep {
        if !engine.is_unbound(st, v) {
            subst.insert(v.clone(), engine.var_term(st, v, None));
        }
    }
    let qual = view
        .qual
        .iter()
        .map(|(w, comps)| {
            let is = comps
                .iter()
                .map(|c| boxes.get(c).copied().unwrap_or(Interval::FULL))
                .collect();
            (w.clone(), is)
        })
        .collect();
    let diseqs = engine.diseq_atoms(st, None);
    let mut residual: Vec<Atom> = Vec::new();
    for a in store.iter().chain(&diseqs) {
        if !view.is_qual_only(a) && !residual.contains(a) {
            residual.push(a.clone());
        }
    }
    let mut proofs = Vec::new();
    if let Some(w) = &witness {
        let reader = Reader {
            engine,
            st,
            w: Some(w),
            pi: engine.diseq_atoms(st, Some(w)),
        };
        for rec in recs {
            let tree = reader.atom_proof(rec, &None);
            match check_proof(program, &QualDomain::U, &tree) {
                Verdict::Valid => {}
                v => {
                    log::debug!("answer proof not accepted: {v}");
                    flags.conditional = true;
                }
            }
            proofs.push(tree);
        }
    }
    Some(Answer {
        subst,
        qual,
        residual,
        flags,
        proofs,
    })
}

/// A qualified goal translated against a translated program.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub program: Program,
    pub goal: CflpGoal,
    pub map: Vec<transform::RuleMap>,
}

pub fn prepare(program: &Program, dom: &QualDomain, goal: &Goal, seed: usize, simplify: bool) -> Result<Prepared> {
    let (t, tr) = transform::transform_program(program, dom, seed)?;
    let mut goal = transform::transform_goal(goal, program, dom, Some(&tr), seed);
    let mut translated = t.program;
    if simplify {
        translated = transform::simplify_program(&translated, dom);
        goal = transform::simplify_goal(&goal, dom);
    }
    Ok(Prepared {
        program: translated,
        goal,
        map: t.map,
    })
}

/// Translates and solves a qualified goal, reporting qualification
/// variables as intervals.
pub fn solve_qualified(
    program: &Program,
    dom: &QualDomain,
    goal: &Goal,
    limits: &SolveLimits,
    simplify: bool,
) -> Result<Solutions> {
    let prepared = prepare(program, dom, goal, transform::seed_from_env(), simplify)?;
    Ok(solve_prepared(&prepared, dom, goal, limits))
}

pub fn solve_prepared(prepared: &Prepared, dom: &QualDomain, goal: &Goal, limits: &SolveLimits) -> Solutions {
    solve_translated(&prepared.program, &prepared.goal, dom, goal, limits)
}

/// Solves the translation `translated_goal` of `goal` over a translated
/// program.
pub fn solve_translated(
    program: &Program,
    translated_goal: &CflpGoal,
    dom: &QualDomain,
    goal: &Goal,
    limits: &SolveLimits,
) -> Solutions {
    let tr = Transformer::new(dom.clone(), program.signature(), 0);
    let qvars: Vec<Var> = goal.parts.iter().map(|p| p.qvar.clone()).collect();
    let qual: Vec<(Var, Vec<Var>)> = qvars.iter().map(|w| (w.clone(), tr.components(w))).collect();
    let hidden: BTreeSet<Var> = qual.iter().flat_map(|(w, cs)| cs.iter().chain(std::iter::once(w)).cloned()).collect();
    let keep = goal
        .vars()
        .into_iter()
        .filter(|v| !hidden.contains(v))
        .collect();
    let view = View { keep, qual, hidden };
    run(program, translated_goal, &view, limits)
}

/// Upper bounds of the qualification intervals of an answer, by variable.
pub fn upper_bounds(a: &Answer) -> BTreeMap<Var, Vec<f64>> {
    a.qual
        .iter()
        .map(|(v, is)| (v.clone(), is.iter().map(|i| i.hi).collect()))
        .collect()
}
