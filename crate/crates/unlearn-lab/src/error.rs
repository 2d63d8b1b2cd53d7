//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by dataset operations, learners, the sharded engine, the
/// privacy layer, and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("delete targets id {id} which is not present in the dataset")]
    DeleteAbsent { id: u64 },
    #[error("add would duplicate existing id {id}")]
    AddDuplicateId { id: u64 },
    #[error("update {index} failed: {source}")]
    SequenceStep { index: usize, source: Box<Error> },
    #[error("feature dimension mismatch: dataset holds {expected}, point has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("label {label} out of range for {label_count} classes")]
    LabelOutOfRange { label: usize, label_count: usize },
    #[error("stream index {index} out of range for a seed vector of {count} streams")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("model variant mismatch: expected {expected}")]
    VariantMismatch { expected: &'static str },
    #[error("distance threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
    #[error("cannot train a centroid model on an empty dataset")]
    EmptyClassSet,
    #[error("inclusion probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("seed vector carries {actual} streams but the ensemble needs {expected}")]
    SeedArityMismatch { expected: usize, actual: usize },
    #[error("exponential-mechanism epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("parameters outside the theorem range: {0}")]
    ParameterRange(String),
    #[error("joint distribution atom has positive joint mass but zero product mass")]
    DegenerateDistribution,
    #[error("joint distribution has {0} atoms; the enumeration oracle supports at most 20")]
    TooManyAtoms(usize),
    #[error("confidence parameter must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("confidence {xi} must exceed delta' = {delta_prime} for the max-information branch")]
    ConfidenceBelowDeltaPrime { xi: f64, delta_prime: f64 },
    #[error("argument out of range: {0}")]
    InvalidRange(String),
    #[error("retrain event probability is specific to k = 3 shards, got k = {0}")]
    UnsupportedK(usize),
    #[error("dataset is not composed of duplicate pairs: {0}")]
    MalformedPairs(String),
    #[error("model variant {0} does not expose per-class confidences")]
    NoConfidence(&'static str),
    #[error("targeted shard set must be a nonempty proper subset of the shards")]
    InvalidTargetSet,
    #[error("round {round}: {source}")]
    AtRound { round: usize, source: Box<Error> },
    #[error("trial {trial}: {source}")]
    AtTrial { trial: u64, source: Box<Error> },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Wraps an error with the interaction round it surfaced in.
    pub fn at_round(self, round: usize) -> Self {
        Error::AtRound {
            round,
            source: Box::new(self),
        }
    }

    /// Wraps an error with the trial index it surfaced in.
    pub fn at_trial(self, trial: u64) -> Self {
        Error::AtTrial {
            trial,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
