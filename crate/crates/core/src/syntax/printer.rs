use std::fmt::{self, Display, Formatter, Write};

use crate::prim;
use crate::program::{CflpGoal, DataDecl, Goal, Program, Rule};
use crate::qual::QualValue;
use crate::semantics::statement::{QcStatement, StatementBody};
use crate::term::{Atom, Expr, Subst, CONS, NIL};

const ATOMIC: u8 = 5;
const CONS_PREC: u8 = 2;

fn binary_prec(e: &Expr) -> Option<u8> {
    match e {
        Expr::App(f, args) if args.len() == 2 => {
            if f.as_str() == CONS {
                Some(CONS_PREC)
            } else if f.as_str() == prim::QVAL {
                None
            } else {
                prim::precedence(f.as_str())
            }
        }
        _ => None,
    }
}

fn proper_list(e: &Expr) -> Option<Vec<&Expr>> {
    let mut items = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            Expr::App(s, args) if s.as_str() == NIL && args.is_empty() => return Some(items),
            Expr::App(s, args) if s.as_str() == CONS && args.len() == 2 => {
                items.push(&args[0]);
                cur = &args[1];
            }
            _ => return None,
        }
    }
}

fn write_string(s: &str, out: &mut Formatter<'_>) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\t' => out.write_str("\\t")?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

fn write_expr(e: &Expr, ctx: u8, out: &mut Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Bottom => out.write_str("_|_"),
        Expr::Var(v) => write!(out, "{v}"),
        Expr::Num(x) => write!(out, "{x}"),
        Expr::App(f, args) => {
            if let Some(items) = proper_list(e) {
                if !items.is_empty() {
                    if let Some(s) = e.as_string() {
                        return write_string(&s, out);
                    }
                }
                out.write_char('[')?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.write_str(", ")?;
                    }
                    write_expr(item, 0, out)?;
                }
                return out.write_char(']');
            }
            if let Some(p) = binary_prec(e) {
                let (lp, rp) = if f.as_str() == CONS {
                    (p + 1, p)
                } else if p == 1 {
                    (p + 1, p + 1)
                } else {
                    (p, p + 1)
                };
                let paren = p < ctx;
                if paren {
                    out.write_char('(')?;
                }
                write_expr(&args[0], lp, out)?;
                write!(out, " {f} ")?;
                write_expr(&args[1], rp, out)?;
                if paren {
                    out.write_char(')')?;
                }
                return Ok(());
            }
            write!(out, "{f}")?;
            if !args.is_empty() {
                out.write_char('(')?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_str(", ")?;
                    }
                    write_expr(a, 0, out)?;
                }
                out.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(self, 0, f)
    }
}

struct At<'a>(&'a Expr, u8);

impl Display for At<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(self.0, self.1, f)
    }
}

fn is_simple(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Num(_) => true,
        Expr::App(_, args) => args.is_empty(),
        Expr::Bottom => false,
    }
}

fn rooted_at_primitive(e: &Expr) -> bool {
    matches!(e, Expr::App(f, _) if prim::is_primitive(f.as_str()))
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let p = self.prim.as_str();
        let two = self.args.len() == 2;
        match self.result.as_bool() {
            Some(true) if p == prim::EQ && two => {
                let (l, r) = (&self.args[0], &self.args[1]);
                if rooted_at_primitive(l) && is_simple(r) {
                    write!(f, "({} == {}) == true", At(l, CONS_PREC), At(r, CONS_PREC))
                } else {
                    write!(f, "{} == {}", At(l, CONS_PREC), At(r, CONS_PREC))
                }
            }
            Some(false) if p == prim::EQ && two => {
                write!(f, "{} /= {}", At(&self.args[0], CONS_PREC), At(&self.args[1], CONS_PREC))
            }
            Some(true) if prim::is_comparison(p) && two => {
                write!(f, "{} {p} {}", At(&self.args[0], CONS_PREC), At(&self.args[1], CONS_PREC))
            }
            Some(true) if p == prim::QVAL => write!(f, "{}", self.lhs()),
            _ => write!(f, "{} == {}", At(&self.lhs(), CONS_PREC), At(&self.result, CONS_PREC)),
        }
    }
}

impl Display for Subst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (i, (v, e)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {e}")?;
        }
        f.write_char('}')
    }
}

fn is_top(q: &QualValue<f64>) -> bool {
    q.components().iter().all(|&c| c == 1.0)
}

fn write_list<T: Display>(items: &[T], f: &mut Formatter<'_>) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.params.is_empty() {
            f.write_char('(')?;
            write_list(&self.params, f)?;
            f.write_char(')')?;
        }
        if is_top(&self.alpha) {
            f.write_str(" --> ")?;
        } else {
            write!(f, " -{}-> ", self.alpha)?;
        }
        write!(f, "{}", self.rhs)?;
        if !self.conds.is_empty() {
            f.write_str(" <== ")?;
            write_list(&self.conds, f)?;
        }
        Ok(())
    }
}

impl Display for DataDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "data {} = ", self.name)?;
        for (i, (c, fields)) in self.ctors.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{c}")?;
            if !fields.is_empty() {
                write!(f, "({})", fields.join(", "))?;
            }
        }
        Ok(())
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for d in &self.data {
            writeln!(f, "{d}")?;
        }
        if !self.data.is_empty() && !self.rules.is_empty() {
            writeln!(f)?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl Display for Goal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} # {}", p.atom, p.qvar)?;
        }
        let bounds: Vec<String> = self
            .parts
            .iter()
            .filter_map(|p| p.threshold.as_ref().map(|b| format!("{} >= {b}", p.qvar)))
            .collect();
        if !bounds.is_empty() {
            write!(f, " | {}", bounds.join(", "))?;
        }
        Ok(())
    }
}

impl Display for CflpGoal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_list(&self.atoms, f)
    }
}

impl Display for StatementBody {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            StatementBody::Production(e, t) => {
                let lhs = if binary_prec(e).is_some() { ATOMIC } else { 0 };
                write!(f, "({} -> {})", At(e, lhs), t)
            }
            StatementBody::Atom(a) => write!(f, "{a}"),
        }
    }
}

impl Display for QcStatement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)?;
        if let Some(d) = &self.qual {
            write!(f, " # {d}")?;
        }
        if !self.pi.is_empty() {
            f.write_str(" <== ")?;
            write_list(&self.pi, f)?;
        }
        Ok(())
    }
}

pub fn print_program(p: &Program) -> String {
    p.to_string()
}

pub fn print_goal(g: &Goal) -> String {
    g.to_string()
}
