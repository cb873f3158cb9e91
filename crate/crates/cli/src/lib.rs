//! Declarative front end for the `abext` library.
//!
//! A problem document (JSON) describes an algebra, a coefficient module, a
//! lattice, a matrix group, cocycles, paths and cycles, and names one task.
//! [`execute`] parses it, cross-checks every section, dispatches the task and
//! returns a [`RunReport`] with a versioned machine-readable layout.

pub mod document;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod report;
pub mod run;

pub use document::{parse_document, Options, Overrides, ProblemDocument, Task};
pub use error::{CliError, EXIT_INDETERMINATE, EXIT_INPUT, EXIT_REJECTED};
pub use report::{execute, RunReport, SCHEMA_VERSION};
pub use run::{run, Outcome};
