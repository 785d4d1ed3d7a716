//! Experiment orchestration: configuration, the per-realization pipeline,
//! aggregation into reports, and output files.

mod config;
mod experiment;
mod pipeline;
mod report;

pub use config::{
    BalanceConfig, BenchmarkConfig, ClusteringConfig, ExperimentConfig, LabelOrderConfig,
    LabelerKind, NetworkConfig, SamplingConfig, DEFAULT_EPSILONS,
};
pub use experiment::{
    run_benchmark, run_experiment, worker_pool, write_experiment_outputs, ExperimentOutput,
    WORKERS_ENV,
};
pub use pipeline::{
    decompose, identify_attractors, prepare_dataset, run_realization, train_realization, Attractors,
    Decomposition, EpsilonOutcome, PreparedData, RealizationRecord,
};
pub use report::{
    expressiveness_heuristic, summarize, CellStats, EpsilonRate, ExperimentReport, Verdict,
    MIN_REALIZATIONS_FOR_HEURISTIC,
};
