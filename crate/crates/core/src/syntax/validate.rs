use std::collections::{BTreeMap, BTreeSet};

use super::ParseOptions;
use crate::prim;
use crate::program::{Goal, Program, Rule};
use crate::qual::QualDomain;
use crate::term::{Atom, Expr, Symbol, Var};

fn has_bottom(e: &Expr) -> bool {
    match e {
        Expr::Bottom => true,
        Expr::App(_, args) => args.iter().any(has_bottom),
        _ => false,
    }
}

fn reserved_name(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(v) if v.as_str().contains('$') => {
            out.insert(v.to_string());
        }
        Expr::App(f, args) => {
            if f.as_str().contains('$') {
                out.insert(f.to_string());
            }
            args.iter().for_each(|a| reserved_name(a, out));
        }
        _ => {}
    }
}

fn rule_exprs(r: &Rule) -> impl Iterator<Item = &Expr> {
    r.params
        .iter()
        .chain(std::iter::once(&r.rhs))
        .chain(r.conds.iter().flat_map(|c| c.args.iter().chain(std::iter::once(&c.result))))
}

fn check_atom_shape(a: &Atom, out: &mut Vec<String>) {
    match prim::arity(a.prim.as_str()) {
        Some(n) if n == a.args.len() => {}
        Some(n) => out.push(format!(
            "primitive `{}` takes {n} arguments, found {}",
            a.prim,
            a.args.len()
        )),
        None => out.push(format!("`{}` is not a primitive", a.prim)),
    }
}

/// Static checks on a parsed program. Each issue is paired with the index of
/// the offending rule, if there is one.
pub(crate) fn program_issues(p: &Program, opts: &ParseOptions) -> Vec<(Option<usize>, String)> {
    let mut out = Vec::new();
    let dom = &opts.dom;
    let mut arities: BTreeMap<Symbol, (usize, Option<usize>)> = BTreeMap::new();
    let declared: BTreeSet<Symbol> = p
        .data
        .iter()
        .flat_map(|d| d.ctors.iter().map(|(c, _)| c.clone()))
        .collect();
    for d in &p.data {
        for (c, fields) in &d.ctors {
            if let Some((n, _)) = arities.insert(c.clone(), (fields.len(), None)) {
                if n != fields.len() {
                    out.push((None, format!("constructor `{c}` is declared twice with different arities")));
                }
            }
        }
    }
    for (i, r) in p.rules.iter().enumerate() {
        let mut issues = Vec::new();
        if prim::is_primitive(r.head.as_str()) {
            issues.push(format!("`{}` is a primitive and cannot be defined", r.head));
        }
        if declared.contains(&r.head) {
            issues.push(format!("`{}` is both a constructor and a defined function", r.head));
        }
        match arities.get(&r.head) {
            Some((n, first)) if *n != r.arity() && !declared.contains(&r.head) => issues.push(format!(
                "`{}` has arity {} here but {n} in {}",
                r.head,
                r.arity(),
                first.map_or("another use".to_string(), |j| format!("rule {}", j + 1))
            )),
            Some(_) => {}
            None => {
                arities.insert(r.head.clone(), (r.arity(), Some(i)));
            }
        }
        if !opts.translated {
            let mut names = BTreeSet::new();
            rule_exprs(r).for_each(|e| reserved_name(e, &mut names));
            if r.head.as_str().contains('$') {
                names.insert(r.head.to_string());
            }
            for n in names {
                issues.push(format!("identifier `{n}` is reserved for translated programs"));
            }
        }
        if rule_exprs(r).any(has_bottom) {
            issues.push("`_|_` may not appear in a program".to_string());
        }
        if !dom.conforms(&r.alpha) {
            issues.push(format!("attenuation factor {} does not belong to domain {dom}", r.alpha));
        } else if !dom.is_usable(&r.alpha) {
            issues.push(format!("attenuation factor {} must have every component above 0", r.alpha));
        }
        let mut seen: Vec<Var> = Vec::new();
        for v in r.params.iter().flat_map(Expr::vars) {
            if seen.contains(&v) {
                issues.push(format!("variable `{v}` occurs twice in the head of `{}`", r.head));
            } else {
                seen.push(v);
            }
        }
        for c in &r.conds {
            check_atom_shape(c, &mut issues);
        }
        out.extend(issues.into_iter().map(|m| (Some(i), m)));
    }
    let defined: BTreeSet<Symbol> = p.rules.iter().map(|r| r.head.clone()).collect();
    for (i, r) in p.rules.iter().enumerate() {
        for (k, param) in r.params.iter().enumerate() {
            if !is_pattern(param, &defined) {
                out.push((
                    Some(i),
                    format!("parameter {} of `{}` is not a constructor term", k + 1, r.head),
                ));
            }
        }
        let mut apps = Vec::new();
        rule_exprs(r).for_each(|e| collect_all_apps(e, &mut apps));
        for (s, n) in apps {
            if let Some(m) = prim::arity(s.as_str()) {
                if m != n {
                    out.push((Some(i), format!("primitive `{s}` takes {m} arguments, found {n}")));
                }
                continue;
            }
            match arities.get(&s) {
                Some((m, _)) if *m != n => out.push((
                    Some(i),
                    format!("`{s}` is used with {n} arguments but has arity {m}"),
                )),
                Some(_) => {}
                None => {
                    arities.insert(s, (n, Some(i)));
                }
            }
        }
    }
    out
}

fn is_pattern(e: &Expr, defined: &BTreeSet<Symbol>) -> bool {
    match e {
        Expr::Var(_) | Expr::Num(_) => true,
        Expr::Bottom => false,
        Expr::App(f, args) => {
            !defined.contains(f) && !prim::is_primitive(f.as_str()) && args.iter().all(|a| is_pattern(a, defined))
        }
    }
}

fn collect_all_apps(e: &Expr, out: &mut Vec<(Symbol, usize)>) {
    if let Expr::App(f, args) = e {
        out.push((f.clone(), args.len()));
        args.iter().for_each(|a| collect_all_apps(a, out));
    }
}

/// Static checks on a parsed goal.
pub(crate) fn goal_issues(g: &Goal, opts: &ParseOptions) -> Vec<String> {
    let mut out = Vec::new();
    let atom_vars = g.vars();
    let mut qvars = BTreeSet::new();
    for part in &g.parts {
        check_atom_shape(&part.atom, &mut out);
        if !qvars.insert(part.qvar.clone()) {
            out.push(format!("qualification variable `{}` is used twice", part.qvar));
        }
        if atom_vars.contains(&part.qvar) {
            out.push(format!(
                "qualification variable `{}` also occurs in the goal's constraints",
                part.qvar
            ));
        }
        if part.atom.args.iter().chain(std::iter::once(&part.atom.result)).any(has_bottom) {
            out.push("`_|_` may not appear in a goal".to_string());
        }
        if let Some(b) = &part.threshold {
            if !opts.dom.is_usable(b) {
                out.push(format!(
                    "threshold {b} for `{}` must belong to domain {} with every component above 0",
                    part.qvar, opts.dom
                ));
            }
        }
    }
    out
}

/// Checks a program against a qualification domain; returns messages of the
/// form `rule N: ...`.
pub fn validate(p: &Program, dom: &QualDomain, translated: bool) -> Vec<String> {
    let opts = ParseOptions {
        dom: dom.clone(),
        translated,
    };
    let mut out: Vec<String> = program_issues(p, &opts)
        .into_iter()
        .map(|(i, m)| match i {
            Some(i) => format!("rule {}: {m}", i + 1),
            None => m,
        })
        .collect();
    out.dedup();
    out
}
