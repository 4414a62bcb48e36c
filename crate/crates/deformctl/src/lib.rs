//! Scenario runner for `deform-core`: TOML inputs, builtin scenarios, check
//! suites and a deterministic JSON report.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod input;
pub mod report;
pub mod scenario;
pub mod suites;

pub use error::CliError;
pub use report::{Outcome, Record, Report};
pub use scenario::{Context, Overrides, Suite};
