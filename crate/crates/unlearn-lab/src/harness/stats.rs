//! Test statistics, binomial confidence intervals, and the hypothesis test
//! against the perfect-unlearning null.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::ensemble::EnsembleState;
use crate::error::{Error, Result};
use crate::harness::config::CiMethod;

/// Outcome of testing a null value against an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    Reject,
    FailToReject,
}

/// 1 iff the post-deletion accuracy fell below the cutoff `c`.
pub fn cutoff_indicator(accuracy_after: f64, c: f64) -> u8 {
    u8::from(accuracy_after < c)
}

/// 1 iff the mean per-model accuracy over the targeted shards is strictly
/// lower than over the non-targeted shards; exact ties favor the null.
pub fn targeted_accuracy_indicator(
    state: &EnsembleState,
    targeted: &BTreeSet<usize>,
    eval: &Dataset,
) -> Result<u8> {
    let k = state.k();
    if targeted.is_empty() || targeted.len() >= k || targeted.iter().any(|&i| i >= k) {
        return Err(Error::InvalidTargetSet);
    }
    let mut targeted_sum = 0.0;
    let mut other_sum = 0.0;
    for shard in 0..k {
        let accuracy = state.model_accuracy(shard, eval)?;
        if targeted.contains(&shard) {
            targeted_sum += accuracy;
        } else {
            other_sum += accuracy;
        }
    }
    let targeted_mean = targeted_sum / targeted.len() as f64;
    let other_mean = other_sum / (k - targeted.len()) as f64;
    Ok(u8::from(targeted_mean < other_mean))
}

/// Binomial proportion interval for `successes` out of `trials`.
pub fn confidence_interval(
    successes: u64,
    trials: u64,
    level: f64,
    method: CiMethod,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidRange("interval needs at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::InvalidRange(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfidence(level));
    }
    let n = trials as f64;
    let s = successes as f64;
    Ok(match method {
        CiMethod::Wilson => {
            let z = Normal::standard().inverse_cdf((1.0 + level) / 2.0);
            let z2 = z * z;
            let p = s / n;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
            ((center - half).max(0.0), (center + half).min(1.0))
        }
        CiMethod::ClopperPearson => {
            let alpha = 1.0 - level;
            let lo = if successes == 0 {
                0.0
            } else {
                Beta::new(s, n - s + 1.0)
                    .expect("valid beta parameters")
                    .inverse_cdf(alpha / 2.0)
            };
            let hi = if successes == trials {
                1.0
            } else {
                Beta::new(s + 1.0, n - s)
                    .expect("valid beta parameters")
                    .inverse_cdf(1.0 - alpha / 2.0)
            };
            (lo, hi)
        }
    })
}

/// Rejects the null iff `null_value` lies outside the closed interval.
pub fn hypothesis_test(interval: (f64, f64), null_value: f64) -> TestOutcome {
    let (lo, hi) = interval;
    if null_value < lo || null_value > hi {
        TestOutcome::Reject
    } else {
        TestOutcome::FailToReject
    }
}

/// Result of a cutoff grid search: the separating cutoff and the indicator
/// intervals of both arms at that cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSearch {
    pub cutoff: f64,
    pub adaptive_interval: (f64, f64),
    pub retrain_interval: (f64, f64),
}

/// Grid-searches the cutoff c maximizing the gap between the adaptive and
/// retrain indicator intervals.
pub fn grid_search_cutoff(
    adaptive_accuracies: &[f64],
    retrain_accuracies: &[f64],
    level: f64,
    method: CiMethod,
) -> Result<CutoffSearch> {
    if adaptive_accuracies.is_empty() || retrain_accuracies.is_empty() {
        return Err(Error::InvalidRange(
            "grid search needs accuracies from both arms".into(),
        ));
    }
    let mut best: Option<(f64, CutoffSearch)> = None;
    for step in 1..100 {
        let c = step as f64 / 100.0;
        let hits = |accs: &[f64]| accs.iter().filter(|&&a| cutoff_indicator(a, c) == 1).count();
        let adaptive = confidence_interval(
            hits(adaptive_accuracies) as u64,
            adaptive_accuracies.len() as u64,
            level,
            method,
        )?;
        let retrain = confidence_interval(
            hits(retrain_accuracies) as u64,
            retrain_accuracies.len() as u64,
            level,
            method,
        )?;
        let gap = adaptive.0 - retrain.1;
        if best.is_none_or(|(g, _)| gap > g) {
            best = Some((
                gap,
                CutoffSearch {
                    cutoff: c,
                    adaptive_interval: adaptive,
                    retrain_interval: retrain,
                },
            ));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
