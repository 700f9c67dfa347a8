//! Expressions, terms, substitutions and atomic constraints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A function or constructor symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A logic variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Partial first-order expressions over a signature.
#[derive(Clone)]
pub enum Expr {
    Bottom,
    Var(Var),
    Num(f64),
    App(Symbol, Vec<Expr>),
}

fn num_key(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Bottom, Expr::Bottom) => true,
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Num(a), Expr::Num(b)) => num_key(*a) == num_key(*b),
            (Expr::App(f, xs), Expr::App(g, ys)) => f == g && xs == ys,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Expr::Bottom => 0u8.hash(state),
            Expr::Var(v) => {
                1u8.hash(state);
                v.hash(state);
            }
            Expr::Num(x) => {
                2u8.hash(state);
                num_key(*x).hash(state);
            }
            Expr::App(f, args) => {
                3u8.hash(state);
                f.hash(state);
                args.hash(state);
            }
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used only for deterministic collections.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        fn rank(e: &Expr) -> u8 {
            match e {
                Expr::Bottom => 0,
                Expr::Var(_) => 1,
                Expr::Num(_) => 2,
                Expr::App(..) => 3,
            }
        }
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Num(a), Expr::Num(b)) => a.total_cmp(b),
            (Expr::App(f, xs), Expr::App(g, ys)) => f.cmp(g).then_with(|| xs.cmp(ys)),
            _ => rank(self).cmp(&rank(other)).then(Ordering::Equal),
        }
    }
}

pub const NIL: &str = "[]";
pub const CONS: &str = ":";
pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(Var::new(name))
    }

    pub fn num(x: f64) -> Self {
        Expr::Num(if x == 0.0 { 0.0 } else { x })
    }

    pub fn app(name: &str, args: Vec<Expr>) -> Self {
        Expr::App(Symbol::new(name), args)
    }

    pub fn constant(name: &str) -> Self {
        Expr::App(Symbol::new(name), Vec::new())
    }

    pub fn bool(b: bool) -> Self {
        Expr::constant(if b { TRUE } else { FALSE })
    }

    pub fn nil() -> Self {
        Expr::constant(NIL)
    }

    pub fn cons(head: Expr, tail: Expr) -> Self {
        Expr::app(CONS, vec![head, tail])
    }

    pub fn list(items: Vec<Expr>) -> Self {
        items
            .into_iter()
            .rev()
            .fold(Expr::nil(), |tail, head| Expr::cons(head, tail))
    }

    /// Name of the nullary constructor standing for a character.
    pub fn char_symbol(c: char) -> String {
        match c {
            '\'' => "'\\''".to_string(),
            '\\' => "'\\\\'".to_string(),
            '\n' => "'\\n'".to_string(),
            '\t' => "'\\t'".to_string(),
            c => format!("'{c}'"),
        }
    }

    /// A string literal as a list of character constructors.
    pub fn string(s: &str) -> Self {
        Expr::list(
            s.chars()
                .map(|c| Expr::constant(&Expr::char_symbol(c)))
                .collect(),
        )
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Expr::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Expr::App(s, args) if args.is_empty() && s.as_str() == TRUE => Some(true),
            Expr::App(s, args) if args.is_empty() && s.as_str() == FALSE => Some(false),
            _ => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Expr::Bottom)
    }

    /// No `⊥` anywhere.
    pub fn is_total(&self) -> bool {
        match self {
            Expr::Bottom => false,
            Expr::Var(_) | Expr::Num(_) => true,
            Expr::App(_, args) => args.iter().all(Expr::is_total),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Bottom | Expr::Num(_) => true,
            Expr::App(_, args) => args.iter().all(Expr::is_ground),
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Expr::Var(w) => w == v,
            Expr::App(_, args) => args.iter().any(|a| a.occurs(v)),
            _ => false,
        }
    }

    /// Symbols occurring in application position.
    pub fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Expr::App(s, args) = self {
            out.insert(s.clone());
            args.iter().for_each(|a| a.symbols(out));
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::App(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::App(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn apply(&self, s: &Subst) -> Expr {
        match self {
            Expr::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
            _ => self.clone(),
        }
    }

    /// Renames variables through `f`.
    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(f(v)),
            Expr::App(s, args) => Expr::App(s.clone(), args.iter().map(|a| a.rename(f)).collect()),
            _ => self.clone(),
        }
    }

    /// Decodes a character list back into a string, if it is one.
    pub fn as_string(&self) -> Option<String> {
        let mut out = String::new();
        let mut cur = self;
        loop {
            match cur {
                Expr::App(s, args) if s.as_str() == NIL && args.is_empty() => return Some(out),
                Expr::App(s, args) if s.as_str() == CONS && args.len() == 2 => {
                    out.push(char_of_symbol(&args[0])?);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }
}

fn char_of_symbol(e: &Expr) -> Option<char> {
    let Expr::App(s, args) = e else { return None };
    if !args.is_empty() {
        return None;
    }
    let inner = s.as_str().strip_prefix('\'')?.strip_suffix('\'')?;
    let mut chars = inner.chars();
    match (chars.next()?, chars.next(), chars.next()) {
        ('\\', Some('n'), None) => Some('\n'),
        ('\\', Some('t'), None) => Some('\t'),
        ('\\', Some(c @ ('\\' | '\'')), None) => Some(c),
        (c, None, _) if c != '\\' => Some(c),
        _ => None,
    }
}

/// The information ordering: `⊥ ⊑ e`, closed under contexts.
pub fn info_leq(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Bottom, _) => true,
        (Expr::App(f, xs), Expr::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| info_leq(x, y))
        }
        _ => a == b,
    }
}

/// Substitutions `σ : Var → Term` with finite domain.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Subst(BTreeMap<Var, Expr>);

impl Subst {
    pub fn new() -> Self {
        Subst(BTreeMap::new())
    }

    pub fn singleton(v: Var, e: Expr) -> Self {
        let mut s = Subst::new();
        s.insert(v, e);
        s
    }

    pub fn insert(&mut self, v: Var, e: Expr) -> Option<Expr> {
        self.0.insert(v, e)
    }

    pub fn get(&self, v: &Var) -> Option<&Expr> {
        self.0.get(v)
    }

    pub fn remove(&mut self, v: &Var) -> Option<Expr> {
        self.0.remove(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains_key(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Expr)> {
        self.0.iter()
    }

    /// `self` followed by `other`: `o(self·other) = (o self) other`.
    pub fn compose(&self, other: &Subst) -> Subst {
        let mut out: BTreeMap<Var, Expr> = self
            .0
            .iter()
            .map(|(v, e)| (v.clone(), e.apply(other)))
            .collect();
        for (v, e) in &other.0 {
            out.entry(v.clone()).or_insert_with(|| e.clone());
        }
        Subst(out)
    }

    pub fn restrict(&self, keep: &[Var]) -> Subst {
        Subst(
            self.0
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, e)| (v.clone(), e.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Var, Expr)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Expr)>>(iter: I) -> Self {
        Subst(iter.into_iter().collect())
    }
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Atomic constraint `p(e1,...,en) == v`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub prim: Symbol,
    pub args: Vec<Expr>,
    pub result: Expr,
}

impl Atom {
    pub fn new(prim: &str, args: Vec<Expr>, result: Expr) -> Self {
        Atom {
            prim: Symbol::new(prim),
            args,
            result,
        }
    }

    /// `p(args)` with result `true`.
    pub fn holds(prim: &str, args: Vec<Expr>) -> Self {
        Atom::new(prim, args, Expr::bool(true))
    }

    pub fn strict_eq(a: Expr, b: Expr) -> Self {
        Atom::holds(crate::prim::EQ, vec![a, b])
    }

    pub fn strict_neq(a: Expr, b: Expr) -> Self {
        Atom::new(crate::prim::EQ, vec![a, b], Expr::bool(false))
    }

    pub fn apply(&self, s: &Subst) -> Atom {
        Atom {
            prim: self.prim.clone(),
            args: self.args.iter().map(|a| a.apply(s)).collect(),
            result: self.result.apply(s),
        }
    }

    pub fn rename(&self, f: &mut impl FnMut(&Var) -> Var) -> Atom {
        Atom {
            prim: self.prim.clone(),
            args: self.args.iter().map(|a| a.rename(f)).collect(),
            result: self.result.rename(f),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
        self.result.collect_vars(out);
    }

    /// Reads the atom back as the expression `p(args)` compared to `result`.
    pub fn lhs(&self) -> Expr {
        Expr::App(self.prim.clone(), self.args.clone())
    }

    /// Whether the result position holds a variable, nullary constructor or
    /// number.
    pub fn result_is_simple(&self) -> bool {
        match &self.result {
            Expr::Var(_) | Expr::Num(_) => true,
            Expr::App(_, args) => args.is_empty(),
            Expr::Bottom => false,
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variables of a constraint set, in order of first occurrence.
pub fn constraint_vars(cs: &[Atom]) -> Vec<Var> {
    let mut out = Vec::new();
    cs.iter().for_each(|a| a.collect_vars(&mut out));
    out
}

pub fn apply_constraints(cs: &[Atom], s: &Subst) -> Vec<Atom> {
    cs.iter().map(|a| a.apply(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    fn example_one_instance() {
        let e = Expr::app("f", vec![Expr::cons(v("X"), v("Xs"))]);
        let mut s = Subst::new();
        s.insert(Var::new("X"), v("A"));
        s.insert(Var::new("Xs"), Expr::cons(v("B"), Expr::Bottom));
        let expected = Expr::app(
            "f",
            vec![Expr::cons(v("A"), Expr::cons(v("B"), Expr::Bottom))],
        );
        assert_eq!(e.apply(&s), expected);
        let target = Expr::app(
            "f",
            vec![Expr::cons(v("A"), Expr::cons(v("B"), Expr::nil()))],
        );
        assert!(info_leq(&expected, &target));
        assert!(!info_leq(&target, &expected));
    }

    #[test]
    fn info_order_basics() {
        assert!(info_leq(&Expr::Bottom, &v("X")));
        let c1 = Expr::app("c", vec![Expr::num(1.0)]);
        let c2 = Expr::app("c", vec![Expr::num(2.0)]);
        assert!(!info_leq(&c1, &c2));
        assert!(info_leq(&c1, &c1));
    }

    #[test]
    fn composition_law() {
        let s1 = Subst::singleton(Var::new("X"), v("Y"));
        let s2 = Subst::singleton(Var::new("Y"), Expr::num(3.0));
        let x = v("X");
        assert_eq!(x.apply(&s1).apply(&s2), Expr::num(3.0));
        assert_eq!(x.apply(&s1.compose(&s2)), Expr::num(3.0));
        assert_eq!(x.apply(&Subst::new()), x);
    }

    #[test]
    fn strings_round_trip() {
        let s = Expr::string("It's\n");
        assert_eq!(s.as_string().as_deref(), Some("It's\n"));
        assert_eq!(Expr::nil().as_string().as_deref(), Some(""));
    }

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(Expr::num(-0.0), Expr::num(0.0));
    }
}
