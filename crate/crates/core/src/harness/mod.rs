//! Experiment harness: synthetic graphs, configuration and grid runs.

mod breakdown;
mod config;
mod experiment;
mod sbm;

pub use breakdown::{activation_breakdown, ActivationBreakdown};
pub use config::{DatasetSpec, ExperimentConfig, MethodSpec};
pub use experiment::{
    graph_seed, run_experiment, train_and_evaluate, write_report, CellSummary, ExperimentReport,
    RunArtifact, RunError, RunMetrics, RunResult, Summary, TrainOutcome, RESULTS_HEADER,
};
pub use sbm::{generate_sbm, SbmParams};
