//! Experiment drivers that compose the solvers into named scenarios and emit reports.

pub mod config;
pub mod datum;
pub mod illposed;
pub mod report;
pub mod scenarios;

pub use datum::Datum;
pub use report::{ExperimentReport, Scenario, SeriesTable, Verdict};
