//! Primitive functions of the real constraint domain and their interpretation.

use crate::error::QcflpError;
use crate::term::{Expr, Symbol};

pub const ADD: &str = "+";
pub const SUB: &str = "-";
pub const MUL: &str = "*";
pub const DIV: &str = "/";
pub const EQ: &str = "==";
pub const LT: &str = "<";
pub const LE: &str = "<=";
pub const GT: &str = ">";
pub const GE: &str = ">=";
pub const QVAL: &str = "qVal";

pub const PRIMITIVES: [&str; 10] = [ADD, SUB, MUL, DIV, EQ, LT, LE, GT, GE, QVAL];

pub fn is_primitive(name: &str) -> bool {
    PRIMITIVES.contains(&name)
}

pub fn arity(name: &str) -> Option<usize> {
    match name {
        QVAL => Some(1),
        n if is_primitive(n) => Some(2),
        _ => None,
    }
}

pub fn is_arithmetic(name: &str) -> bool {
    matches!(name, ADD | SUB | MUL | DIV)
}

pub fn is_comparison(name: &str) -> bool {
    matches!(name, LT | LE | GT | GE)
}

/// Binding strength of infix primitives; higher binds tighter.
pub fn precedence(name: &str) -> Option<u8> {
    match name {
        EQ | LT | LE | GT | GE => Some(1),
        ADD | SUB => Some(3),
        MUL | DIV => Some(4),
        _ => None,
    }
}

/// Outcome of comparing two partial terms for strict equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqOutcome {
    /// Both sides total and identical.
    Equal,
    /// A constructor or value clash at some position.
    Clash,
    /// Not decided by the available information.
    Undecided,
}

/// Structural strict-equality comparison. Variables only compare equal to
/// themselves; anything involving `⊥` or distinct variables is undecided
/// unless a clash is found elsewhere.
pub fn compare_terms(a: &Expr, b: &Expr) -> EqOutcome {
    match (a, b) {
        (Expr::Bottom, _) | (_, Expr::Bottom) => EqOutcome::Undecided,
        (Expr::Var(x), Expr::Var(y)) if x == y => EqOutcome::Equal,
        (Expr::Var(_), _) | (_, Expr::Var(_)) => EqOutcome::Undecided,
        (Expr::Num(x), Expr::Num(y)) => {
            if x == y {
                EqOutcome::Equal
            } else {
                EqOutcome::Clash
            }
        }
        (Expr::App(f, xs), Expr::App(g, ys)) => {
            if f != g || xs.len() != ys.len() {
                return EqOutcome::Clash;
            }
            let mut all_equal = true;
            for (x, y) in xs.iter().zip(ys) {
                match compare_terms(x, y) {
                    EqOutcome::Clash => return EqOutcome::Clash,
                    EqOutcome::Undecided => all_equal = false,
                    EqOutcome::Equal => {}
                }
            }
            if all_equal {
                EqOutcome::Equal
            } else {
                EqOutcome::Undecided
            }
        }
        _ => EqOutcome::Clash,
    }
}

pub fn apply_arith(name: &str, x: f64, y: f64) -> Option<f64> {
    let r = match name {
        ADD => x + y,
        SUB => x - y,
        MUL => x * y,
        DIV => {
            if y == 0.0 {
                return None;
            }
            x / y
        }
        _ => return None,
    };
    r.is_finite().then_some(r)
}

pub fn apply_cmp(name: &str, x: f64, y: f64) -> Option<bool> {
    match name {
        LT => Some(x < y),
        LE => Some(x <= y),
        GT => Some(x > y),
        GE => Some(x >= y),
        _ => None,
    }
}

/// Interprets a primitive on ground arguments, which may contain `⊥`.
/// Returns `Expr::Bottom` when the result is undefined.
pub fn eval_primitive(p: &Symbol, args: &[Expr]) -> Result<Expr, QcflpError> {
    let name = p.as_str();
    let Some(n) = arity(name) else {
        return Err(QcflpError::Usage(format!("`{name}` is not a primitive function")));
    };
    if args.len() != n {
        return Err(QcflpError::Usage(format!(
            "primitive `{name}` expects {n} arguments, got {}",
            args.len()
        )));
    }
    if args.iter().any(|a| !a.is_ground()) {
        return Err(QcflpError::Usage(format!(
            "primitive `{name}` applied to non-ground arguments"
        )));
    }
    if name == EQ {
        return Ok(match compare_terms(&args[0], &args[1]) {
            EqOutcome::Equal => Expr::bool(true),
            EqOutcome::Clash => Expr::bool(false),
            EqOutcome::Undecided => Expr::Bottom,
        });
    }
    let nums: Option<Vec<f64>> = args.iter().map(Expr::as_num).collect();
    let Some(nums) = nums else {
        return Ok(Expr::Bottom);
    };
    Ok(match name {
        QVAL => Expr::bool(nums[0] > 0.0 && nums[0] <= 1.0),
        _ if is_comparison(name) => Expr::bool(apply_cmp(name, nums[0], nums[1]).unwrap_or(false)),
        _ => apply_arith(name, nums[0], nums[1]).map_or(Expr::Bottom, Expr::num),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(p: &str, args: Vec<Expr>) -> Expr {
        eval_primitive(&Symbol::new(p), &args).unwrap()
    }

    #[test]
    fn documented_examples() {
        let r = eval(MUL, vec![Expr::num(0.9), Expr::num(0.8)]);
        assert!((r.as_num().unwrap() - 0.72).abs() < 1e-12);
        assert_eq!(eval(EQ, vec![Expr::num(65.0), Expr::num(65.0)]), Expr::bool(true));
        assert_eq!(eval(LT, vec![Expr::Bottom, Expr::num(200.0)]), Expr::Bottom);
    }

    #[test]
    fn strict_equality_on_partial_terms() {
        let a = Expr::app("c", vec![Expr::Bottom, Expr::num(1.0)]);
        let b = Expr::app("c", vec![Expr::num(3.0), Expr::num(2.0)]);
        assert_eq!(eval(EQ, vec![a.clone(), b]), Expr::bool(false));
        let c = Expr::app("c", vec![Expr::num(3.0), Expr::num(1.0)]);
        assert_eq!(eval(EQ, vec![a, c]), Expr::Bottom);
    }

    #[test]
    fn non_primitive_is_usage_error() {
        assert!(eval_primitive(&Symbol::new("foo"), &[]).is_err());
    }

    #[test]
    fn qval_and_division() {
        assert_eq!(eval(QVAL, vec![Expr::num(0.0)]), Expr::bool(false));
        assert_eq!(eval(QVAL, vec![Expr::num(1.0)]), Expr::bool(true));
        assert_eq!(eval(DIV, vec![Expr::num(1.0), Expr::num(0.0)]), Expr::Bottom);
    }
}
