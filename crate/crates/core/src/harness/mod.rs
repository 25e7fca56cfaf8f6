//! Experiment drivers: trajectories, projection onto a reference grid,
//! relative error, convergence studies and critical time steps.

mod config;
mod projection;
mod run;
mod study;

pub use config::{ExperimentConfig, ModelConfig, ModelKind, RunConfig, StabilityConfig};
pub use projection::{error_metric, project_cubic, project_cubic_values};
pub use run::{integrate, integrate_with, steps_for, Record, RunOptions, RunRecord};
pub use study::{
    convergence_csv, convergence_study, critical_time_step, Dt0Result, ErrorReport, StudyResult,
    DT0_SCAN_RATIO,
};
