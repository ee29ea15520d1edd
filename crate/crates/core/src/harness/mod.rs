//! Experiment configuration, execution and report persistence.

pub mod config;
pub mod experiments;
pub mod report;
pub mod smooth;

pub use config::{ExperimentConfig, ExperimentKind, RadialConfig, TestFunctionConfig};
pub use experiments::{
    run, run_covariance, run_distance, run_means, run_stein, run_sweep, run_tails, SweepSummary, SweepVerdict,
};
pub use report::{ExperimentReport, ReportHeader, ReportRow};
pub use smooth::SmoothTestFunction;
