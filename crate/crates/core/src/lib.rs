//! Qualified constraint functional logic programming.
//!
//! Programs are conditional rewrite rules with attenuation factors over a
//! qualification domain and the real constraint domain. The crate parses
//! them, translates them into qualification-free programs, solves goals by
//! constrained narrowing, and checks results against proof trees and a
//! bounded fixpoint semantics.

mod engine;
pub mod error;
pub mod oracle;
pub mod prim;
pub mod program;
pub mod qual;
pub mod runtime;
pub mod semantics;
pub mod solver;
pub mod syntax;
pub mod term;
pub mod transform;

pub use error::{Diagnostic, QcflpError, Result};
pub use program::{CflpGoal, DataDecl, Goal, GoalPart, Program, Rule, Signature};
pub use qual::{Certainty, Product, QualDomain, QualificationDomain, Real};
pub use term::{Atom, Expr, Subst, Symbol, Var};

/// Qualification values with 64-bit components, as used by programs.
pub type QualValue = qual::QualValue<f64>;
/// The certainty domain over `f64`.
pub type U = Certainty<f64>;
/// The product of two certainty domains over `f64`.
pub type UxU = Product<U, U>;
