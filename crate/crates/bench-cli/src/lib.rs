//! Experiment harness for the antenna-placement crates: seeded Monte-Carlo
//! sweeps, runtime measurement, an exhaustive small-instance oracle, and CSV
//! emission for plotting.

pub mod oracle;
pub mod output;
pub mod runner;
pub mod spec;

mod error;

pub use error::BenchError;

pub type Result<T> = std::result::Result<T, BenchError>;
