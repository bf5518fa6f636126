use std::fmt;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    Invalid(ValidationReport),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("operation requires a modal signature (arities 1 and 2 only)")]
    NonModal,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One invariant violation found while validating a structure file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateRelation(String),
    ZeroArity(String),
    NonModalArity { relation: String, arity: usize },
    DuplicateElement(String),
    UnknownRelation(String),
    ArityMismatch { relation: String, expected: usize, found: usize },
    UnknownElement { relation: String, element: String },
    UnknownPoint(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateRelation(r) => write!(f, "duplicate relation `{r}`"),
            Violation::ZeroArity(r) => write!(f, "relation `{r}` has arity 0"),
            Violation::NonModalArity { relation, arity } => {
                write!(f, "modal signature has relation `{relation}` of arity {arity}")
            }
            Violation::DuplicateElement(e) => write!(f, "duplicate element `{e}`"),
            Violation::UnknownRelation(r) => write!(f, "interpretation of undeclared relation `{r}`"),
            Violation::ArityMismatch { relation, expected, found } => write!(
                f,
                "arity mismatch in `{relation}`: expected {expected}, found tuple of width {found}"
            ),
            Violation::UnknownElement { relation, element } => {
                write!(f, "unknown element `{element}` in a tuple of `{relation}`")
            }
            Violation::UnknownPoint(p) => write!(f, "unknown element `{p}` given as point"),
        }
    }
}

/// Every violation found in one structure, in discovery order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
