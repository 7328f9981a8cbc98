//! Experiment configuration, replicated runs, persistence and the drivers
//! behind the command-line interface.

pub mod config;
mod experiments;
mod instances;
pub mod output;
mod replicate;

pub use config::{ExperimentConfig, ExperimentKind, ReferenceSource};
pub use experiments::{
    point_checks, run_probe, run_rate, run_solve, run_verify, sample_region_points, CheckSummary, Experiment,
    NearStartSummary, ProbeOutcome, RateOutcome, SolveOutcome, Tally, VerifyOutcome,
};
pub use instances::{build_instance, build_partition, build_regularizer, build_schedule};
pub use replicate::{
    resolve_reference_value, run_replications, run_with_seeds, MeanTrajectory, Reference, ReplicationSet,
    REFERENCE_MAX_STEPS, REFERENCE_TOL,
};
