//! Experiment configuration. Serializes as snake_case JSON.

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleVariant;
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;

/// Which interaction to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Duplicate-pair lookup attack against the partition engine.
    DuplicatePair,
    /// Random-subset deletion of correctly classified near-pairs against
    /// threshold nearest-neighbor models.
    ThresholdPair,
    /// Shard targeting via training-point overconfidence of exposed models.
    ConfidenceTargeting,
    /// A pre-committed deletion sequence; the nonadaptive control.
    NonAdaptiveBaseline,
}

/// Which arm of the two-arm design a run reports: the unlearning engine
/// after the adaptive interaction, or the full-retraining comparator on the
/// same final dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Adaptive,
    Retrain,
}

/// Sharding rule for the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShardingMode {
    Bernoulli { p: f64 },
    Partition,
}

impl ShardingMode {
    pub fn variant(self) -> EnsembleVariant {
        match self {
            ShardingMode::Bernoulli { p } => EnsembleVariant::Bernoulli { p },
            ShardingMode::Partition => EnsembleVariant::Partition,
        }
    }
}

/// Differentially private publishing parameters; absent means labels are
/// published in the clear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub eps_prime: f64,
}

/// Binomial proportion interval method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    #[default]
    Wilson,
    ClopperPearson,
}

impl std::str::FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wilson" => Ok(CiMethod::Wilson),
            "clopper-pearson" => Ok(CiMethod::ClopperPearson),
            other => Err(Error::Config(format!(
                "unknown ci method {other:?}; expected wilson or clopper-pearson"
            ))),
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_cutoff() -> f64 {
    0.5
}

fn default_fraction() -> f64 {
    1.0
}

fn default_eval_points() -> usize {
    2000
}

fn default_separation() -> f64 {
    3.0
}

fn default_dim() -> usize {
    16
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub arm: Arm,
    pub k: usize,
    pub sharding: ShardingMode,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub privacy: Option<PrivacyConfig>,
    /// Points for point scenarios, pairs for pair scenarios.
    pub n_points: usize,
    pub trials: u64,
    pub ci_level: f64,
    #[serde(default)]
    pub ci_method: CiMethod,
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Accuracy cutoff c for the cutoff indicator.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    /// Fraction of correctly classified points the threshold attack deletes.
    #[serde(default = "default_fraction")]
    pub deletion_fraction: f64,
    /// Number of leading points the nonadaptive baseline deletes.
    #[serde(default)]
    pub fixed_deletes: usize,
    /// Held-out evaluation points (confidence-targeting scenario).
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    /// Distance between the two Gaussian class centers.
    #[serde(default = "default_separation")]
    pub separation: f64,
    /// Feature dimension of the Gaussian clusters.
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// CSV output path; the summary lands next to it.
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    /// Duplicate-pair attack at its canonical scale: lookup models over a
    /// 3-way partition of 50 pairs.
    pub fn duplicate_pair(trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            scenario: Scenario::DuplicatePair,
            arm: Arm::Adaptive,
            k: 3,
            sharding: ShardingMode::Partition,
            learner: LearnerSpec::Lookup,
            privacy: None,
            n_points: 50,
            trials,
            ci_level: 0.95,
            ci_method: CiMethod::Wilson,
            master_seed,
            workers: 1,
            cutoff: 0.5,
            deletion_fraction: 1.0,
            fixed_deletes: 0,
            eval_points: 0,
            separation: 0.0,
            dim: 1,
            out: None,
        }
    }

    /// Threshold near-pair attack: threshold-NN models over a 3-way
    /// partition of 50 within-radius pairs.
    pub fn threshold_pair(fraction: f64, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            scenario: Scenario::ThresholdPair,
            learner: LearnerSpec::ThresholdNn { tau: 1.0 },
            deletion_fraction: fraction,
            ci_level: 0.975,
            ..ExperimentConfig::duplicate_pair(trials, master_seed)
        }
    }

    /// Confidence-targeting attack: noisy-centroid models over a 2-way
    /// partition of two Gaussian clusters, judged on held-out points.
    /// Small shards in a high dimension keep the per-point overconfidence
    /// signal strong enough that the targeted shard loses most of its data.
    pub fn confidence_targeting(sigma: f64, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            scenario: Scenario::ConfidenceTargeting,
            arm: Arm::Adaptive,
            k: 2,
            sharding: ShardingMode::Partition,
            learner: LearnerSpec::NearestCentroid { sigma },
            privacy: None,
            n_points: 48,
            trials,
            ci_level: 0.95,
            ci_method: CiMethod::Wilson,
            master_seed,
            workers: 1,
            cutoff: 0.5,
            deletion_fraction: 1.0,
            fixed_deletes: 0,
            eval_points: default_eval_points(),
            separation: default_separation(),
            dim: default_dim(),
            out: None,
        }
    }

    /// Nonadaptive control: Bernoulli sharding with p = 1/k and a fixed
    /// batch of leading deletions.
    pub fn nonadaptive_baseline(k: usize, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            scenario: Scenario::NonAdaptiveBaseline,
            arm: Arm::Adaptive,
            k,
            sharding: ShardingMode::Bernoulli { p: 1.0 / k as f64 },
            learner: LearnerSpec::Lookup,
            privacy: None,
            n_points: 30,
            trials,
            ci_level: 0.95,
            ci_method: CiMethod::Wilson,
            master_seed,
            workers: 1,
            cutoff: 0.5,
            deletion_fraction: 1.0,
            fixed_deletes: 10,
            eval_points: 0,
            separation: 0.0,
            dim: 1,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.n_points == 0 {
            return Err(Error::Config("n_points must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.cutoff) {
            return Err(Error::Config(format!(
                "cutoff must lie in [0, 1], got {}",
                self.cutoff
            )));
        }
        if !(0.0..=1.0).contains(&self.deletion_fraction) {
            return Err(Error::Config(format!(
                "deletion fraction must lie in [0, 1], got {}",
                self.deletion_fraction
            )));
        }
        match self.scenario {
            Scenario::ConfidenceTargeting => {
                if self.eval_points == 0 {
                    return Err(Error::Config(
                        "confidence targeting needs a held-out evaluation set".into(),
                    ));
                }
                if self.privacy.is_some() {
                    return Err(Error::Config(
                        "confidence targeting publishes models; private label serving does not apply"
                            .into(),
                    ));
                }
            }
            Scenario::NonAdaptiveBaseline if self.fixed_deletes > self.n_points => {
                return Err(Error::Config(
                    "cannot delete more fixed points than the dataset holds".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}
