use std::fmt;

use thiserror::Error;

use crate::qual::QualError;

/// A located message produced by the parser or validator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcflpError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Qual(#[from] QualError),
    #[error("{}", join(.0))]
    Diagnostics(Vec<Diagnostic>),
}

fn join(ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(Diagnostic::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<Diagnostic> for QcflpError {
    fn from(d: Diagnostic) -> Self {
        QcflpError::Diagnostics(vec![d])
    }
}

impl QcflpError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            QcflpError::Diagnostics(ds) => ds,
            _ => &[],
        }
    }
}

pub type Result<T, E = QcflpError> = std::result::Result<T, E>;
