//! Concrete syntax: lexer, parser, printer and static checks.

mod lexer;
mod parser;
mod printer;
mod validate;

use crate::error::Result;
use crate::program::{CflpGoal, Goal, Program};
use crate::qual::QualDomain;
use crate::semantics::statement::QcStatement;
use crate::term::{Expr, Subst};

pub use parser::parse_qual_text;
pub use printer::{print_goal, print_program};
pub use validate::validate;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub dom: QualDomain,
    /// Accept the `$`-names produced by the program transformation.
    pub translated: bool,
}

impl ParseOptions {
    pub fn new(dom: QualDomain) -> Self {
        ParseOptions { dom, translated: false }
    }

    pub fn translated(dom: QualDomain) -> Self {
        ParseOptions { dom, translated: true }
    }
}

pub fn parse_program(src: &str, opts: &ParseOptions) -> Result<Program> {
    parser::parse_program(src, opts)
}

/// Parses `δ1 # W1, ..., δm # Wm | W1 >= β1, ...`.
pub fn parse_goal(src: &str, program: Option<&Program>, opts: &ParseOptions) -> Result<Goal> {
    parser::parse_goal(src, program, opts)
}

/// Parses a comma-separated conjunction of atomic constraints.
pub fn parse_cflp_goal(src: &str, program: Option<&Program>) -> Result<CflpGoal> {
    parser::parse_cflp_goal(src, program)
}

pub fn parse_statement(src: &str, program: Option<&Program>) -> Result<QcStatement> {
    parser::parse_statement(src, program)
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    parser::parse_expr(src)
}

pub fn parse_subst(src: &str) -> Result<Subst> {
    parser::parse_subst(src)
}
