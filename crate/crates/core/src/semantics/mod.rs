//! Semantic judgments: qc-statements, entailment, proof trees and the
//! bounded fixpoint oracle.

pub mod certificate;
pub mod fixpoint;
pub mod proof;
pub mod search;
pub mod statement;

pub use certificate::{check_certificate, read_certificate, write_certificate};
pub use fixpoint::{bounded_lfp, Fact, Interpretation, LfpConfig};
pub use proof::{check_proof, ProofTree, Tag, Verdict};
pub use search::{holds, HoldsVerdict, SearchLimits};
pub use statement::{entailment_checks, instantiate_rule, qc_entails, qc_entails_in, EntailmentChecks, QcStatement, StatementBody};
