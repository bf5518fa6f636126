//! Trace relations, unravelings and back-and-forth games for finite pointed
//! Kripke structures.
//!
//! The crate decides the bounded trace relations (trace inclusion, labelled
//! and complete trace inclusion, graded and ready trace equivalence) in three
//! independent ways: by comparing traces directly, by searching morphisms
//! between unravelings, and by evaluating synthesised modal formulas. The
//! [`oracle`] module cross-checks these decisions on random instances.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod games;
pub mod logic;
pub mod oracle;
pub mod structures;
pub mod traces;
pub mod unravel;

pub use error::{Error, Result};
pub use games::{GameResult, Variant, Winner};
pub use logic::{parse_formula, Formula, Fragment};
pub use structures::{PointedStructure, Signature, Structure};
pub use traces::{check_trace_relation, Bound, Relation, Verdict};
pub use unravel::{ml_graft, ml_unravel, pr_unravel, tree_unravel, ForestObject};
