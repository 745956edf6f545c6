//! Config-driven experiment runner, reports and the ball cache.

pub mod cache;
pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, Overrides};
pub use report::{emit_report, ExperimentReport, Outcome};
pub use run::run_experiment;
