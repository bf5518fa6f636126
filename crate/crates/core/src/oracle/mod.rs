//! Reference implementations used as independent oracles: morphism and
//! isomorphism search, random instance generation, and the verification
//! suites built on top of them.

pub mod cor74;
pub mod generate;
pub mod iso;
pub mod morphism;
pub mod prop86;
pub mod suites;

pub use cor74::{run_cor74, Cor74Outcome, Cor74Params};
pub use iso::find_isomorphism;
pub use morphism::{check_morphism, find_morphism, MorphismKind, MorphismWitness, Span};
pub use prop86::{replay_prop86, replay_prop86_with, ChainReport, Station};
pub use suites::{run_suite, Report, Suite, SuiteParams};
