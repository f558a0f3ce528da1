//! Seeded experiment runners and their persisted records.
//!
//! Runs execute in parallel on the ambient rayon pool. Each (algorithm,
//! run) pair owns its own random stream and results are folded in index
//! order, so output is identical for any worker count.

mod config;
mod experiments;
mod learner;
mod record;

pub use config::{
    AlgorithmKind, AlgorithmParams, AlgorithmSpec, BehaviorKind, Experiment, ExperimentConfig, StepIndexMode,
};
pub use experiments::{average_error, run_bias_experiment, run_experiment, run_random_mdp_benchmark, run_roulette_experiment};
pub use learner::{Behavior, Learner, LearnerParams};
pub use record::{format_value, MetricSeries, RunRecord, SummaryRow};
