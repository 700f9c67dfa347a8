use std::collections::BTreeSet;

use super::lexer::{tokenize, Tok, Token};
use super::validate;
use super::ParseOptions;
use crate::error::{Diagnostic, QcflpError};
use crate::prim;
use crate::program::{CflpGoal, DataDecl, Goal, GoalPart, Program, Rule};
use crate::qual::QualValue;
use crate::semantics::statement::{QcStatement, StatementBody};
use crate::term::{Atom, Expr, Subst, Symbol, Var};

/// A condition before it is turned into an atomic constraint.
#[derive(Debug, Clone)]
enum RawCond {
    Plain(Expr),
    Neq(Expr, Expr),
}

struct RawRule {
    head: Symbol,
    params: Vec<Expr>,
    alpha: QualValue<f64>,
    rhs: Expr,
    conds: Vec<(RawCond, usize, usize)>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (l, c) = self.here();
        Err(Diagnostic::new(l, c, msg))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn fresh_anon(&mut self) -> Expr {
        self.anon += 1;
        Expr::var(&format!("_Anon{}", self.anon))
    }

    // expressions

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.cons_expr()?;
        let op = match self.peek() {
            Tok::EqEq => prim::EQ,
            Tok::Lt => prim::LT,
            Tok::Le => prim::LE,
            Tok::Gt => prim::GT,
            Tok::Ge => prim::GE,
            Tok::Neq => return self.err("`/=` is only allowed as a whole condition"),
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.cons_expr()?;
        if matches!(self.peek(), Tok::EqEq | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Neq) {
            return self.err("comparison operators do not associate; add parentheses");
        }
        Ok(Expr::app(op, vec![lhs, rhs]))
    }

    /// A condition: an expression, or `e /= e`.
    fn condition(&mut self) -> PResult<RawCond> {
        let lhs = self.cons_expr()?;
        if self.eat(&Tok::Neq) {
            let rhs = self.cons_expr()?;
            return Ok(RawCond::Neq(lhs, rhs));
        }
        let op = match self.peek() {
            Tok::EqEq => prim::EQ,
            Tok::Lt => prim::LT,
            Tok::Le => prim::LE,
            Tok::Gt => prim::GT,
            Tok::Ge => prim::GE,
            _ => return Ok(RawCond::Plain(lhs)),
        };
        self.bump();
        let rhs = self.cons_expr()?;
        if matches!(self.peek(), Tok::EqEq | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Neq) {
            return self.err("comparison operators do not associate; add parentheses");
        }
        Ok(RawCond::Plain(Expr::app(op, vec![lhs, rhs])))
    }

    fn cons_expr(&mut self) -> PResult<Expr> {
        let head = self.additive()?;
        if self.eat(&Tok::Colon) {
            let tail = self.cons_expr()?;
            Ok(Expr::cons(head, tail))
        } else {
            Ok(head)
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut e = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => prim::ADD,
                Tok::Minus => prim::SUB,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.multiplicative()?;
            e = Expr::app(op, vec![e, r]);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => prim::MUL,
                Tok::Slash => prim::DIV,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.unary()?;
            e = Expr::app(op, vec![e, r]);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            if let Tok::Num(x) = *self.peek() {
                self.bump();
                return Ok(Expr::num(-x));
            }
            let e = self.unary()?;
            return Ok(Expr::app(prim::SUB, vec![Expr::num(0.0), e]));
        }
        self.atom()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(&Tok::RParen, "`,` or `)`")?;
            return Ok(out);
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.bump() {
            Tok::Num(x) => Ok(Expr::num(x)),
            Tok::Str(s) => Ok(Expr::string(&s)),
            Tok::Char(c) => Ok(Expr::constant(&Expr::char_symbol(c))),
            Tok::Bottom => Ok(Expr::Bottom),
            Tok::Anon => Ok(self.fresh_anon()),
            Tok::Upper(name) => Ok(Expr::var(&name)),
            Tok::Lower(name) => {
                if self.eat(&Tok::LParen) {
                    Ok(Expr::app(&name, self.args()?))
                } else {
                    Ok(Expr::constant(&name))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBrack => {
                let mut items = Vec::new();
                if self.eat(&Tok::RBrack) {
                    return Ok(Expr::nil());
                }
                loop {
                    items.push(self.expr()?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    if self.eat(&Tok::Bar) {
                        let tail = self.expr()?;
                        self.expect(&Tok::RBrack, "`]`")?;
                        return Ok(items
                            .into_iter()
                            .rev()
                            .fold(tail, |t, h| Expr::cons(h, t)));
                    }
                    self.expect(&Tok::RBrack, "`,` or `]`")?;
                    return Ok(Expr::list(items));
                }
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected an expression, found {}", describe(&other)))
            }
        }
    }

    // qualification literals

    fn qual_literal(&mut self) -> PResult<QualValue<f64>> {
        match self.bump() {
            Tok::Num(x) => Ok(QualValue::Real(x)),
            Tok::LParen => {
                let l = self.qual_literal()?;
                self.expect(&Tok::Comma, "`,` in a qualification pair")?;
                let r = self.qual_literal()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(QualValue::pair(l, r))
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected a qualification value, found {}", describe(&other)))
            }
        }
    }

    // declarations

    fn type_expr(&mut self) -> PResult<String> {
        let base = match self.bump() {
            Tok::Lower(n) | Tok::Upper(n) => n,
            Tok::LBrack => {
                let inner = self.type_expr()?;
                self.expect(&Tok::RBrack, "`]`")?;
                format!("[{inner}]")
            }
            Tok::LParen => {
                let mut parts = vec![self.type_expr()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.type_expr()?);
                }
                self.expect(&Tok::RParen, "`)`")?;
                format!("({})", parts.join(", "))
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                return self.err(format!("expected a type, found {}", describe(&other)));
            }
        };
        if self.eat(&Tok::Yields) {
            let rest = self.type_expr()?;
            return Ok(format!("{base} -> {rest}"));
        }
        Ok(base)
    }

    fn type_decl(&mut self) -> PResult<()> {
        loop {
            match self.bump() {
                Tok::Lower(_) => {}
                other => {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err(format!("expected a type name, found {}", describe(&other)));
                }
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::Equals, "`=`")?;
        self.type_expr()?;
        Ok(())
    }

    fn data_decl(&mut self) -> PResult<DataDecl> {
        let name = match self.bump() {
            Tok::Lower(n) => Symbol::new(&n),
            other => {
                self.pos = self.pos.saturating_sub(1);
                return self.err(format!("expected a type name, found {}", describe(&other)));
            }
        };
        while matches!(self.peek(), Tok::Upper(_)) {
            self.bump();
        }
        self.expect(&Tok::Equals, "`=`")?;
        let mut ctors = Vec::new();
        loop {
            let c = match self.bump() {
                Tok::Lower(n) => Symbol::new(&n),
                other => {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err(format!("expected a constructor, found {}", describe(&other)));
                }
            };
            let mut fields = Vec::new();
            if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                loop {
                    fields.push(self.type_expr()?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(&Tok::RParen, "`,` or `)`")?;
                    break;
                }
            }
            ctors.push((c, fields));
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        Ok(DataDecl { name, ctors })
    }

    fn rule(&mut self, head: String, top: &QualValue<f64>, line: usize, col: usize) -> PResult<RawRule> {
        let params = if self.eat(&Tok::LParen) {
            self.args()?
        } else {
            Vec::new()
        };
        let alpha = match self.bump() {
            Tok::Arrow => top.clone(),
            Tok::AttArrow(text) => parse_qual_text(&text).map_err(|m| {
                let (l, c) = (self.toks[self.pos - 1].line, self.toks[self.pos - 1].col);
                Diagnostic::new(l, c, m)
            })?,
            other => {
                self.pos = self.pos.saturating_sub(1);
                return self.err(format!("expected `-->` or an attenuated arrow, found {}", describe(&other)));
            }
        };
        let rhs = self.expr()?;
        let mut conds = Vec::new();
        if self.eat(&Tok::If) {
            loop {
                let (l, c) = self.here();
                conds.push((self.condition()?, l, c));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(RawRule {
            head: Symbol::new(&head),
            params,
            alpha,
            rhs,
            conds,
            line,
            col,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Lower(s) | Tok::Upper(s) => format!("`{s}`"),
        Tok::Num(x) => format!("`{x}`"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

/// Parses a qualification literal such as `0.9` or `(0.9, 0.8)`.
pub fn parse_qual_text(text: &str) -> Result<QualValue<f64>, String> {
    let mut p = Parser::new(text).map_err(|d| d.message)?;
    let q = p.qual_literal().map_err(|d| d.message)?;
    if !p.at_eof() {
        return Err(format!("trailing input after qualification `{text}`"));
    }
    Ok(q)
}

fn is_simple(e: &Expr, defined: &BTreeSet<Symbol>) -> bool {
    match e {
        Expr::Var(_) | Expr::Num(_) => true,
        Expr::App(f, args) => args.is_empty() && !defined.contains(f) && !prim::is_primitive(f.as_str()),
        Expr::Bottom => false,
    }
}

/// Reads a condition as an atomic constraint `p(e1,...,en) == v`.
fn to_atom(c: RawCond, defined: &BTreeSet<Symbol>) -> Result<Atom, String> {
    match c {
        RawCond::Neq(l, r) => Ok(Atom::strict_neq(l, r)),
        RawCond::Plain(Expr::App(f, mut args)) if f.as_str() == prim::EQ && args.len() == 2 => {
            let r = args.pop().unwrap_or(Expr::Bottom);
            let l = args.pop().unwrap_or(Expr::Bottom);
            match l {
                Expr::App(p, inner) if prim::is_primitive(p.as_str()) && is_simple(&r, defined) => Ok(Atom {
                    prim: p,
                    args: inner,
                    result: r,
                }),
                l => Ok(Atom::strict_eq(l, r)),
            }
        }
        RawCond::Plain(Expr::App(f, args))
            if prim::is_comparison(f.as_str()) || f.as_str() == prim::QVAL =>
        {
            Ok(Atom { prim: f, args, result: Expr::bool(true) })
        }
        RawCond::Plain(Expr::App(f, _)) if prim::is_arithmetic(f.as_str()) => {
            Err(format!("arithmetic expression `{f}` is not a constraint"))
        }
        RawCond::Plain(e) => Ok(Atom::strict_eq(e, Expr::bool(true))),
    }
}

fn defined_heads(rules: &[RawRule]) -> BTreeSet<Symbol> {
    rules.iter().map(|r| r.head.clone()).collect()
}

pub(super) fn parse_program(src: &str, opts: &ParseOptions) -> Result<Program, QcflpError> {
    let mut p = Parser::new(src)?;
    let mut data = Vec::new();
    let mut raw = Vec::new();
    let mut diags = Vec::new();
    let top: QualValue<f64> = opts.dom.top();
    while !p.at_eof() {
        let (line, col) = p.here();
        match p.bump() {
            Tok::Lower(kw) if kw == "type" && matches!(p.peek(), Tok::Lower(_)) => p.type_decl()?,
            Tok::Lower(kw) if kw == "data" && matches!(p.peek(), Tok::Lower(_)) => data.push(p.data_decl()?),
            Tok::Lower(name) => {
                if p.eat(&Tok::ColonColon) {
                    p.type_expr()?;
                } else {
                    raw.push(p.rule(name, &top, line, col)?);
                }
            }
            other => {
                p.pos = p.pos.saturating_sub(1);
                return Err(p
                    .err::<()>(format!("expected a declaration or rule, found {}", describe(&other)))
                    .unwrap_err()
                    .into());
            }
        }
    }
    let defined = defined_heads(&raw);
    let mut rules = Vec::new();
    let mut positions = Vec::new();
    for r in raw {
        let mut conds = Vec::new();
        for (c, l, col) in r.conds {
            match to_atom(c, &defined) {
                Ok(a) => conds.push(a),
                Err(m) => diags.push(Diagnostic::new(l, col, m)),
            }
        }
        positions.push((r.line, r.col));
        rules.push(Rule {
            head: r.head,
            params: r.params,
            alpha: r.alpha,
            rhs: r.rhs,
            conds,
        });
    }
    let program = Program { data, rules };
    for (idx, msg) in validate::program_issues(&program, opts) {
        let (l, c) = idx.map_or((0, 0), |i| positions[i]);
        diags.push(Diagnostic::new(l, c, msg));
    }
    if diags.is_empty() {
        Ok(program)
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(QcflpError::Diagnostics(diags))
    }
}

fn defined_of(program: Option<&Program>) -> BTreeSet<Symbol> {
    program
        .map(|p| p.rules.iter().map(|r| r.head.clone()).collect())
        .unwrap_or_default()
}

pub(super) fn parse_goal(src: &str, program: Option<&Program>, opts: &ParseOptions) -> Result<Goal, QcflpError> {
    let defined = defined_of(program);
    let mut p = Parser::new(src)?;
    let mut parts: Vec<GoalPart> = Vec::new();
    if !p.at_eof() && p.peek() != &Tok::Bar {
        loop {
            let cond = p.condition()?;
            let atom = to_atom(cond, &defined).map_err(|m| {
                let (l, c) = p.here();
                Diagnostic::new(l, c, m)
            })?;
            p.expect(&Tok::Hash, "`#` and a qualification variable")?;
            let (l, c) = p.here();
            let qvar = match p.bump() {
                Tok::Upper(n) => Var::new(&n),
                other => return Err(Diagnostic::new(l, c, format!("expected a qualification variable, found {}", describe(&other))).into()),
            };
            if parts.iter().any(|q| q.qvar == qvar) {
                return Err(Diagnostic::new(l, c, format!("qualification variable `{qvar}` is used twice")).into());
            }
            parts.push(GoalPart { atom, qvar, threshold: None });
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if p.eat(&Tok::Bar) {
        loop {
            let (l, c) = p.here();
            let w = match p.bump() {
                Tok::Upper(n) => Var::new(&n),
                other => return Err(Diagnostic::new(l, c, format!("expected a qualification variable, found {}", describe(&other))).into()),
            };
            p.expect(&Tok::Ge, "`>=`")?;
            let beta = p.qual_literal()?;
            let Some(part) = parts.iter_mut().find(|q| q.qvar == w) else {
                return Err(Diagnostic::new(l, c, format!("threshold on undeclared qualification variable `{w}`")).into());
            };
            if part.threshold.is_some() {
                return Err(Diagnostic::new(l, c, format!("second threshold for `{w}`")).into());
            }
            part.threshold = Some(beta);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if !p.at_eof() {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    let goal = Goal { parts };
    let issues = validate::goal_issues(&goal, opts);
    if issues.is_empty() {
        Ok(goal)
    } else {
        Err(QcflpError::Diagnostics(
            issues.into_iter().map(|m| Diagnostic::new(1, 1, m)).collect(),
        ))
    }
}

pub(super) fn parse_cflp_goal(src: &str, program: Option<&Program>) -> Result<CflpGoal, QcflpError> {
    let defined = defined_of(program);
    let mut p = Parser::new(src)?;
    let mut atoms = Vec::new();
    if !p.at_eof() {
        loop {
            let (l, c) = p.here();
            let cond = p.condition()?;
            atoms.push(to_atom(cond, &defined).map_err(|m| Diagnostic::new(l, c, m))?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if !p.at_eof() {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    Ok(CflpGoal { atoms })
}

pub(super) fn parse_expr(src: &str) -> Result<Expr, QcflpError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    Ok(e)
}

/// `(e -> t) # d <== Π`, `δ # d <== Π`; the `# d` part is optional for
/// unqualified statements and `<== Π` may be omitted when `Π` is empty.
pub(super) fn parse_statement(src: &str, program: Option<&Program>) -> Result<QcStatement, QcflpError> {
    let defined = defined_of(program);
    let mut p = Parser::new(src)?;
    let body = if p.peek() == &Tok::LParen && paren_production(&p) {
        p.bump();
        let e = p.expr()?;
        p.expect(&Tok::Yields, "`->`")?;
        let t = p.expr()?;
        p.expect(&Tok::RParen, "`)`")?;
        StatementBody::Production(e, t)
    } else {
        let (l, c) = p.here();
        let cond = p.condition()?;
        StatementBody::Atom(to_atom(cond, &defined).map_err(|m| Diagnostic::new(l, c, m))?)
    };
    let qual = if p.eat(&Tok::Hash) {
        Some(p.qual_literal()?)
    } else {
        None
    };
    let mut pi = Vec::new();
    if p.eat(&Tok::If) && !p.at_eof() {
        loop {
            let (l, c) = p.here();
            let cond = p.condition()?;
            pi.push(to_atom(cond, &defined).map_err(|m| Diagnostic::new(l, c, m))?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if !p.at_eof() {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    Ok(QcStatement { body, qual, pi })
}

/// Whether the parenthesis at the cursor encloses `e -> t` at depth one.
fn paren_production(p: &Parser) -> bool {
    let mut depth = 0i32;
    let mut k = 0;
    loop {
        match p.peek_at(k) {
            Tok::LParen | Tok::LBrack => depth += 1,
            Tok::RParen | Tok::RBrack => {
                depth -= 1;
                if depth == 0 {
                    return false;
                }
            }
            Tok::Yields if depth == 1 => return true,
            Tok::Eof => return false,
            _ => {}
        }
        k += 1;
    }
}

/// `{X -> t, ...}`
pub(super) fn parse_subst(src: &str) -> Result<Subst, QcflpError> {
    let mut p = Parser::new(src)?;
    p.expect(&Tok::LBrace, "`{`")?;
    let mut s = Subst::new();
    if !p.eat(&Tok::RBrace) {
        loop {
            let (l, c) = p.here();
            let v = match p.bump() {
                Tok::Upper(n) => Var::new(&n),
                other => return Err(Diagnostic::new(l, c, format!("expected a variable, found {}", describe(&other))).into()),
            };
            p.expect(&Tok::Yields, "`->`")?;
            let e = p.expr()?;
            if s.insert(v.clone(), e).is_some() {
                return Err(Diagnostic::new(l, c, format!("variable `{v}` is bound twice")).into());
            }
            if p.eat(&Tok::Comma) {
                continue;
            }
            p.expect(&Tok::RBrace, "`,` or `}`")?;
            break;
        }
    }
    if !p.at_eof() {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    Ok(s)
}
