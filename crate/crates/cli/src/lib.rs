//! Command-line harness for `airg-core`: builds advection problems, runs
//! setup and Richardson solves, and writes JSON / CSV reports.

pub mod args;
pub mod report;
pub mod run;

pub use args::Cli;
pub use report::{Method, Report, RunRecord, SCHEMA_VERSION};
pub use run::run;
