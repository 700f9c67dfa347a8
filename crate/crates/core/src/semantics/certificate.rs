//! Line-oriented proof certificates.
//!
//! ```text
//! statement\t<statement>
//! <TAG>\t<conclusion>\trule=<N|->\ttheta={X -> t, ...}\tchildren=<k>
//! ```
//!
//! Nodes are listed in preorder; rule numbers start at 1.

use super::proof::{check_proof, ProofTree, Tag, Verdict};
use super::statement::{QcStatement, StatementBody};
use crate::error::QcflpError;
use crate::program::Program;
use crate::qual::{QualDomain, QualValue};
use crate::solver::TOL;
use crate::syntax::{parse_statement, parse_subst};

pub fn write_certificate(statement: &QcStatement, tree: &ProofTree) -> String {
    let mut out = format!("statement\t{statement}\n");
    for node in tree.nodes() {
        let rule = node.rule.map_or("-".to_string(), |r| (r + 1).to_string());
        out.push_str(&format!(
            "{}\t{}\trule={rule}\ttheta={}\tchildren={}\n",
            node.tag_name(),
            node.conclusion,
            node.theta,
            node.children.len()
        ));
    }
    out
}

fn usage(line: usize, msg: impl std::fmt::Display) -> QcflpError {
    QcflpError::Usage(format!("certificate line {line}: {msg}"))
}

struct Line {
    tag: Tag,
    qualified: bool,
    conclusion: QcStatement,
    rule: Option<usize>,
    theta: crate::term::Subst,
    children: usize,
}

fn parse_line(program: &Program, n: usize, text: &str) -> Result<Line, QcflpError> {
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() != 5 {
        return Err(usage(n, "expected five tab-separated fields"));
    }
    let (tag, qualified) = Tag::parse(fields[0]).ok_or_else(|| usage(n, format!("unknown tag `{}`", fields[0])))?;
    let conclusion = parse_statement(fields[1], Some(program)).map_err(|e| usage(n, e))?;
    let rule = match fields[2].strip_prefix("rule=") {
        Some("-") => None,
        Some(k) => {
            let k: usize = k.parse().map_err(|_| usage(n, "bad rule number"))?;
            if k == 0 {
                return Err(usage(n, "rule numbers start at 1"));
            }
            Some(k - 1)
        }
        None => return Err(usage(n, "expected `rule=`")),
    };
    let theta = match fields[3].strip_prefix("theta=") {
        Some(s) => parse_subst(s).map_err(|e| usage(n, e))?,
        None => return Err(usage(n, "expected `theta=`")),
    };
    let children = fields[4]
        .strip_prefix("children=")
        .and_then(|k| k.parse().ok())
        .ok_or_else(|| usage(n, "expected `children=<k>`"))?;
    Ok(Line {
        tag,
        qualified,
        conclusion,
        rule,
        theta,
        children,
    })
}

fn build(lines: &mut std::iter::Peekable<std::vec::IntoIter<(usize, Line)>>) -> Result<ProofTree, QcflpError> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| QcflpError::Usage("certificate ends before all premises are listed".into()))?;
    if line.qualified != line.conclusion.qual.is_some() {
        return Err(usage(n, "tag and conclusion disagree on being qualified"));
    }
    let mut children = Vec::with_capacity(line.children);
    for _ in 0..line.children {
        children.push(build(lines)?);
    }
    Ok(ProofTree {
        tag: line.tag,
        conclusion: line.conclusion,
        children,
        rule: line.rule,
        theta: line.theta,
    })
}

/// Reads a certificate back into its statement and proof tree.
pub fn read_certificate(program: &Program, text: &str) -> Result<(QcStatement, ProofTree), QcflpError> {
    let mut it = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = it.next().ok_or_else(|| QcflpError::Usage("empty certificate".into()))?;
    let stmt_text = head
        .strip_prefix("statement\t")
        .ok_or_else(|| usage(1, "expected `statement<TAB>...`"))?;
    let statement = parse_statement(stmt_text, Some(program)).map_err(|e| usage(1, e))?;
    let mut lines = Vec::new();
    for (i, l) in it {
        lines.push((i + 1, parse_line(program, i + 1, l)?));
    }
    let mut iter = lines.into_iter().peekable();
    let tree = build(&mut iter)?;
    if let Some((n, _)) = iter.next() {
        return Err(usage(n, "node outside the proof tree"));
    }
    Ok((statement, tree))
}

fn same_qual(dom: &QualDomain, a: &Option<QualValue<f64>>, b: &Option<QualValue<f64>>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => dom.approx_eq(x, y, TOL),
        _ => false,
    }
}

/// Every premise carries the qualification the proof search assigns to it:
/// the conclusion's value for arguments, and its residual under the rule's
/// attenuation factor for the right-hand side and conditions of a `DF` step.
fn canonical(program: &Program, dom: &QualDomain, node: &ProofTree, path: &mut Vec<usize>) -> Result<(), Verdict> {
    let d = &node.conclusion.qual;
    let args = match (&node.tag, &node.conclusion.body) {
        (Tag::Df, StatementBody::Production(crate::term::Expr::App(_, es), _)) => es.len(),
        _ => node.children.len(),
    };
    let residual = match (node.tag, d, node.rule.and_then(|r| program.rules.get(r))) {
        (Tag::Df, Some(d), Some(rule)) => Some(dom.residual(d, &rule.alpha)),
        _ => None,
    };
    for (i, child) in node.children.iter().enumerate() {
        path.push(i);
        let expected = if i < args {
            d.clone()
        } else {
            match &residual {
                Some(r) => r.clone(),
                None => d.clone(),
            }
        };
        if !same_qual(dom, &child.conclusion.qual, &expected) {
            return Err(Verdict::Invalid {
                path: path.clone(),
                reason: format!(
                    "premise qualification {} is not the canonical {}",
                    show(&child.conclusion.qual),
                    show(&expected)
                ),
            });
        }
        canonical(program, dom, child, path)?;
        path.pop();
    }
    Ok(())
}

fn show(q: &Option<QualValue<f64>>) -> String {
    q.as_ref().map_or("none".to_string(), |q| q.to_string())
}

/// Re-validates a certificate: its root concludes the stated statement, the
/// tree is a valid proof, and every qualification annotation is canonical.
pub fn check_certificate(program: &Program, dom: &QualDomain, text: &str) -> Verdict {
    let (statement, tree) = match read_certificate(program, text) {
        Ok(x) => x,
        Err(e) => {
            return Verdict::Invalid {
                path: Vec::new(),
                reason: e.to_string(),
            }
        }
    };
    if tree.conclusion != statement {
        return Verdict::Invalid {
            path: Vec::new(),
            reason: "the root does not conclude the stated statement".into(),
        };
    }
    if let Err(v) = canonical(program, dom, &tree, &mut Vec::new()) {
        return v;
    }
    check_proof(program, dom, &tree)
}
