//! Monte Carlo experiment harness: configuration, synthetic data, test
//! statistics, and the trial runner.

pub mod config;
pub mod runner;
pub mod stats;
pub mod synth;

pub use config::{Arm, CiMethod, ExperimentConfig, PrivacyConfig, Scenario, ShardingMode};
pub use runner::{
    build_requester, build_train_data, run_experiment, run_interaction, run_trial, summary_json,
    write_csv, Experiment, ExperimentSummary, TrialResult,
};
pub use stats::{
    confidence_interval, cutoff_indicator, grid_search_cutoff, hypothesis_test, mean,
    targeted_accuracy_indicator, CutoffSearch, TestOutcome,
};
