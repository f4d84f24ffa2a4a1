//! Manufactured-solution study, CSV output and verification suites.

pub mod manufactured;
pub mod study;
pub mod verify;

pub use manufactured::{Affine, ExactSolution, Manufactured, Variant};
pub use study::{emit_csv, run_convergence, ErrorRecord, StudyConfig};
pub use verify::{run_suite, Suite, SuiteReport};
