//! The Monte Carlo experiment runner.
//!
//! One trial = one full interaction: train, publish, then alternate
//! requester updates with re-publication, privately when configured. Trials
//! are seeded by mixing the master seed with the trial index, so results
//! are a pure function of the configuration, adding trials never perturbs
//! earlier ones, and serial and parallel execution agree byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use serde::Serialize;

use crate::adversaries::{
    retrain_baseline, ConfidenceTargetingRequester, DuplicatePairRequester, FixedRequester,
    Published, Requester, ThresholdPairRequester,
};
use crate::data::{apply_update, Dataset, PointId, Update, UpdateSequence};
use crate::ensemble::EnsembleState;
use crate::error::{Error, Result};
use crate::harness::config::{Arm, ExperimentConfig, Scenario, ShardingMode};
use crate::harness::stats::{
    confidence_interval, cutoff_indicator, hypothesis_test, mean, targeted_accuracy_indicator,
    TestOutcome,
};
use crate::harness::synth;
use crate::privacy::{interaction_step, PrivacyBudget};
use crate::rng::{mix_words, SeedVector, Stream};

// Domain tags separating the independent random streams of one trial.
const DOMAIN_DATA: u64 = 1;
const DOMAIN_ASSIGN: u64 = 2;
const DOMAIN_ENSEMBLE: u64 = 3;
const DOMAIN_ATTACK: u64 = 4;
const DOMAIN_MECH: u64 = 5;
const DOMAIN_FRESH: u64 = 6;
const DOMAIN_RETRAIN_SEED: u64 = 7;
const DOMAIN_RETRAIN_ASSIGN: u64 = 8;
const DOMAIN_EVAL: u64 = 9;

fn trial_stream(config: &ExperimentConfig, trial: u64, domain: u64) -> Stream {
    Stream::from_words(&[config.master_seed, trial, domain])
}

fn trial_seed_word(config: &ExperimentConfig, trial: u64, domain: u64) -> u64 {
    mix_words(&[config.master_seed, trial, domain])
}

/// Everything one trial reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub indicator: u8,
    pub acc_before: f64,
    pub acc_after: f64,
    /// Cumulative single-shard training calls, initial training included.
    pub retrain_total: usize,
    pub guess_acc: Option<f64>,
    pub budget_resets: u64,
    /// Retrain counts per round, starting with round 0.
    pub retrain_per_round: Vec<usize>,
}

/// The training set for a trial, generated deterministically from the
/// config and trial index.
pub fn build_train_data(config: &ExperimentConfig, trial: u64) -> Result<Dataset> {
    match config.scenario {
        Scenario::DuplicatePair => Ok(synth::duplicate_pairs(config.n_points)),
        Scenario::ThresholdPair => {
            let tau = match config.learner {
                crate::learners::LearnerSpec::ThresholdNn { tau } => tau,
                _ => {
                    return Err(Error::Config(
                        "threshold-pair scenario needs the threshold_nn learner".into(),
                    ))
                }
            };
            synth::threshold_pairs(config.n_points, tau)
        }
        Scenario::ConfidenceTargeting => {
            let mut stream = trial_stream(config, trial, DOMAIN_DATA);
            synth::two_gaussians(config.n_points, config.dim, config.separation, 0, &mut stream)
        }
        Scenario::NonAdaptiveBaseline => Ok(synth::duplicate_pairs(config.n_points)),
    }
}

/// The scenario's requester over the trial's training data.
pub fn build_requester(config: &ExperimentConfig, trial: u64) -> Result<Requester> {
    let train = build_train_data(config, trial)?;
    Ok(match config.scenario {
        Scenario::DuplicatePair => Requester::DuplicatePair(DuplicatePairRequester::new(train)),
        Scenario::ThresholdPair => Requester::ThresholdPair(ThresholdPairRequester::new(
            train,
            config.deletion_fraction,
            trial_stream(config, trial, DOMAIN_ATTACK),
        )),
        Scenario::ConfidenceTargeting => {
            Requester::ConfidenceTargeting(ConfidenceTargetingRequester::new(train, config.k))
        }
        Scenario::NonAdaptiveBaseline => {
            let deletes: Vec<Update> = train
                .points()
                .take(config.fixed_deletes)
                .map(|p| Update::delete(p.clone()))
                .collect();
            Requester::Fixed(FixedRequester::new(UpdateSequence::new(deletes)))
        }
    })
}

fn publish(
    config: &ExperimentConfig,
    state: &EnsembleState,
    ids: &[PointId],
) -> Result<Published> {
    match config.scenario {
        Scenario::ConfidenceTargeting => Ok(Published::Models(state.models().to_vec())),
        _ => {
            let mut labels = BTreeMap::new();
            for id in ids {
                let point = state.global().get(*id).expect("published ids are current");
                labels.insert(*id, state.aggregate_majority(&point.features)?.label);
            }
            Ok(Published::Labels(labels))
        }
    }
}

/// Runs one full interaction for `trial` and reports its statistics. The
/// requester must have been built over the same config and trial index.
pub fn run_interaction(
    config: &ExperimentConfig,
    requester: &mut Requester,
    trial: u64,
) -> Result<TrialResult> {
    run_interaction_full(config, requester, trial).map(|(result, _)| result)
}

/// [`run_interaction`] plus the final ensemble state (the comparator state
/// in the retrain arm), for distributional checks.
fn run_interaction_full(
    config: &ExperimentConfig,
    requester: &mut Requester,
    trial: u64,
) -> Result<(TrialResult, EnsembleState)> {
    config.validate()?;
    let train = build_train_data(config, trial)?;
    let eval = match config.scenario {
        Scenario::ConfidenceTargeting => {
            let mut stream = trial_stream(config, trial, DOMAIN_EVAL);
            Some(synth::two_gaussians(
                config.eval_points,
                config.dim,
                config.separation,
                1_000_000,
                &mut stream,
            )?)
        }
        _ => None,
    };

    let mut assign = trial_stream(config, trial, DOMAIN_ASSIGN);
    let seed = SeedVector::new(trial_seed_word(config, trial, DOMAIN_ENSEMBLE), config.k);
    let mut state = match config.sharding {
        ShardingMode::Bernoulli { p } => {
            EnsembleState::train_distributed(&train, config.k, p, seed, config.learner)?
        }
        ShardingMode::Partition => {
            EnsembleState::train_partition(&train, config.k, seed, config.learner, &mut assign)?
        }
    };

    // Shard membership right after training, for scoring shard guesses.
    let initial_membership: BTreeMap<PointId, usize> = train
        .ids()
        .map(|id| {
            let shards = state.shards_containing(id);
            (id, shards.first().copied().unwrap_or(usize::MAX))
        })
        .collect();

    let mut budget = match config.privacy {
        Some(p) => Some(PrivacyBudget::new(p.epsilon, p.delta, p.eps_prime)?),
        None => None,
    };
    let mut mech = trial_stream(config, trial, DOMAIN_MECH);
    let mut fresh = trial_stream(config, trial, DOMAIN_FRESH);
    let mut budget_resets = 0u64;

    let acc_before = match &eval {
        Some(e) => state.accuracy(e)?,
        None => state.accuracy(&train)?,
    };

    // Round 0: publish the initial models or labels.
    let ids: Vec<PointId> = state.global().ids().collect();
    let mut published = match budget.as_mut() {
        Some(b) => publish_private(config, &state, b, &ids, &mut mech)?,
        None => publish(config, &state, &ids)?,
    };

    let mut round = 0usize;
    loop {
        round += 1;
        let Some(update) = requester
            .next_update(&published)
            .map_err(|e| e.at_round(round))?
        else {
            break;
        };
        match budget.as_mut() {
            Some(b) => {
                // Pending queries re-publish predictions for every point
                // surviving the round's update.
                let next = apply_update(state.global(), &update).map_err(|e| e.at_round(round))?;
                let ids: Vec<PointId> = next.ids().collect();
                let queries: Vec<Vec<f64>> =
                    next.points().map(|p| p.features.clone()).collect();
                let fresh_seed = SeedVector::new(fresh.next_u64(), config.k);
                let outcome =
                    interaction_step(&mut state, b, &update, &queries, fresh_seed, &mut mech)
                        .map_err(|e| e.at_round(round))?;
                budget_resets += u64::from(outcome.did_full_retrain);
                published = Published::Labels(
                    ids.into_iter().zip(outcome.published).collect(),
                );
            }
            None => {
                match config.sharding {
                    ShardingMode::Bernoulli { .. } => state.update_distributed(&update),
                    ShardingMode::Partition => state.update_partition(&update, &mut assign),
                }
                .map_err(|e| e.at_round(round))?;
                let ids: Vec<PointId> = state.global().ids().collect();
                published = publish(config, &state, &ids)?;
            }
        }
    }

    let retrain_per_round = state.retrain_log().per_round().to_vec();
    let retrain_total = state.retrain_log().total();

    // The retrain arm swaps in the full-retraining comparator on the final
    // dataset before any statistic is computed.
    let final_state = match config.arm {
        Arm::Adaptive => state,
        Arm::Retrain => {
            let fresh_seed = SeedVector::new(
                trial_seed_word(config, trial, DOMAIN_RETRAIN_SEED),
                config.k,
            );
            let mut retrain_assign = trial_stream(config, trial, DOMAIN_RETRAIN_ASSIGN);
            let assign_arg = match config.sharding {
                ShardingMode::Partition => Some(&mut retrain_assign),
                ShardingMode::Bernoulli { .. } => None,
            };
            retrain_baseline(
                state.global(),
                config.sharding.variant(),
                config.k,
                config.learner,
                fresh_seed,
                assign_arg,
            )?
        }
    };

    let acc_after = match &eval {
        Some(e) => final_state.accuracy(e)?,
        None => final_state.accuracy(final_state.global())?,
    };

    let indicator = match config.scenario {
        Scenario::ConfidenceTargeting => {
            let targeted: BTreeSet<usize> = (0..config.k / 2).collect();
            let eval = eval.as_ref().expect("confidence targeting has an eval set");
            targeted_accuracy_indicator(&final_state, &targeted, eval)?
        }
        _ => cutoff_indicator(acc_after, config.cutoff),
    };

    let guess_acc = requester.shard_guesses().map(|guesses| {
        let hits = guesses
            .iter()
            .filter(|(id, &guess)| initial_membership.get(id) == Some(&guess))
            .count();
        hits as f64 / guesses.len() as f64
    });

    Ok((
        TrialResult {
            trial,
            indicator,
            acc_before,
            acc_after,
            retrain_total,
            guess_acc,
            budget_resets,
            retrain_per_round,
        },
        final_state,
    ))
}

fn publish_private(
    config: &ExperimentConfig,
    state: &EnsembleState,
    budget: &mut PrivacyBudget,
    ids: &[PointId],
    mech: &mut Stream,
) -> Result<Published> {
    debug_assert!(!matches!(config.scenario, Scenario::ConfidenceTargeting));
    let mut labels = BTreeMap::new();
    for id in ids {
        let point = state.global().get(*id).expect("published ids are current");
        labels.insert(
            *id,
            crate::privacy::serve_prediction(state, budget, &point.features, mech)?,
        );
    }
    Ok(Published::Labels(labels))
}

/// Builds the scenario requester and runs one trial.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    let mut requester = build_requester(config, trial)?;
    run_interaction(config, &mut requester, trial).map_err(|e| e.at_trial(trial))
}

/// Aggregated view of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub scenario: Scenario,
    pub arm: Arm,
    pub trials: u64,
    pub indicator_successes: u64,
    pub indicator_mean: f64,
    pub ci_level: f64,
    pub ci_method: crate::harness::config::CiMethod,
    pub indicator_ci_lo: f64,
    pub indicator_ci_hi: f64,
    pub null_value: f64,
    pub test_outcome: TestOutcome,
    pub acc_before_mean: f64,
    pub acc_after_mean: f64,
    pub guess_acc_mean: Option<f64>,
    pub retrain_total_mean: f64,
    pub budget_resets_total: u64,
}

/// Results plus summary of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub results: Vec<TrialResult>,
    pub summary: ExperimentSummary,
}

/// Runs all trials (in parallel across `workers` threads when configured;
/// the aggregation is an ordered reduce by trial index either way) and
/// aggregates indicators into an interval and hypothesis test.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let trials = config.trials;
    let workers = config.workers.min(trials as usize).max(1);
    let mut results: Vec<Option<Result<TrialResult>>> = Vec::new();
    results.resize_with(trials as usize, || None);

    if workers == 1 {
        for trial in 0..trials {
            results[trial as usize] = Some(run_trial(config, trial));
        }
    } else {
        let chunks: Vec<Vec<(u64, Result<TrialResult>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|worker| {
                    let config = &*config;
                    scope.spawn(move || {
                        (worker as u64..trials)
                            .step_by(workers)
                            .map(|trial| (trial, run_trial(config, trial)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("trial worker panicked"))
                .collect()
        });
        for chunk in chunks {
            for (trial, result) in chunk {
                results[trial as usize] = Some(result);
            }
        }
    }

    let results: Vec<TrialResult> = results
        .into_iter()
        .map(|r| r.expect("every trial ran"))
        .collect::<Result<_>>()?;

    let successes = results.iter().map(|r| u64::from(r.indicator)).sum::<u64>();
    let interval = confidence_interval(successes, trials, config.ci_level, config.ci_method)?;
    let guesses: Vec<f64> = results.iter().filter_map(|r| r.guess_acc).collect();
    let summary = ExperimentSummary {
        scenario: config.scenario,
        arm: config.arm,
        trials,
        indicator_successes: successes,
        indicator_mean: successes as f64 / trials as f64,
        ci_level: config.ci_level,
        ci_method: config.ci_method,
        indicator_ci_lo: interval.0,
        indicator_ci_hi: interval.1,
        null_value: 0.5,
        test_outcome: hypothesis_test(interval, 0.5),
        acc_before_mean: mean(&results.iter().map(|r| r.acc_before).collect::<Vec<_>>()),
        acc_after_mean: mean(&results.iter().map(|r| r.acc_after).collect::<Vec<_>>()),
        guess_acc_mean: (!guesses.is_empty()).then(|| mean(&guesses)),
        retrain_total_mean: mean(
            &results
                .iter()
                .map(|r| r.retrain_total as f64)
                .collect::<Vec<_>>(),
        ),
        budget_resets_total: results.iter().map(|r| r.budget_resets).sum(),
    };
    Ok(Experiment { results, summary })
}

/// Renders per-trial results as CSV with the fixed header.
pub fn write_csv(results: &[TrialResult]) -> String {
    let mut out = String::from("trial,indicator,acc_before,acc_after,retrain_total,guess_acc,budget_resets\n");
    for r in results {
        let guess = r
            .guess_acc
            .map(|g| format!("{g:.6}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{},{}\n",
            r.trial, r.indicator, r.acc_before, r.acc_after, r.retrain_total, guess, r.budget_resets
        ));
    }
    out
}

/// Renders the summary as pretty JSON.
pub fn summary_json(summary: &ExperimentSummary) -> String {
    let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
    json.push('\n');
    json
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::CiMethod;

    #[test]
    fn empty_requester_reports_initial_training_only() {
        let mut config = ExperimentConfig::nonadaptive_baseline(4, 1, 3);
        config.fixed_deletes = 0;
        let result = run_trial(&config, 0).unwrap();
        assert_eq!(result.retrain_per_round, vec![4]);
        assert_eq!(result.retrain_total, 4);
        assert_eq!(result.budget_resets, 0);
    }

    #[test]
    fn unsharded_points_delete_for_free() {
        // p = 0: every shard is empty, so a fixed delete retrains nothing
        // and accuracy (vacuously 0) is unchanged.
        let mut config = ExperimentConfig::nonadaptive_baseline(3, 1, 5);
        config.sharding = ShardingMode::Bernoulli { p: 0.0 };
        config.fixed_deletes = 1;
        let result = run_trial(&config, 0).unwrap();
        assert_eq!(result.retrain_per_round, vec![3, 0]);
        assert_eq!(result.acc_before, result.acc_after);
    }

    #[test]
    fn trials_are_deterministic() {
        let config = ExperimentConfig::duplicate_pair(3, 42);
        assert_eq!(run_trial(&config, 1).unwrap(), run_trial(&config, 1).unwrap());
    }

    #[test]
    fn experiments_emit_identical_bytes_on_reruns() {
        let mut config = ExperimentConfig::duplicate_pair(5, 11);
        config.n_points = 10;
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(write_csv(&a.results), write_csv(&b.results));
        assert_eq!(summary_json(&a.summary), summary_json(&b.summary));
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let mut serial = ExperimentConfig::duplicate_pair(8, 23);
        serial.n_points = 10;
        let mut parallel = serial.clone();
        parallel.workers = 4;
        let a = run_experiment(&serial).unwrap();
        let b = run_experiment(&parallel).unwrap();
        assert_eq!(a.results, b.results);
        assert_eq!(summary_json(&a.summary), summary_json(&b.summary));
    }

    #[test]
    fn duplicate_pair_attack_zeroes_training_accuracy() {
        let mut config = ExperimentConfig::duplicate_pair(4, 9);
        config.n_points = 20;
        for trial in 0..4 {
            let result = run_trial(&config, trial).unwrap();
            assert!((result.acc_before - 2.0 / 3.0).abs() < 0.35);
            assert_eq!(result.acc_after, 0.0);
            assert_eq!(result.indicator, 1);
        }
    }

    #[test]
    fn retrain_arm_restores_two_thirds_accuracy() {
        let mut config = ExperimentConfig::duplicate_pair(6, 9);
        config.n_points = 30;
        config.arm = Arm::Retrain;
        let experiment = run_experiment(&config).unwrap();
        assert!(
            (experiment.summary.acc_after_mean - 2.0 / 3.0).abs() < 0.2,
            "retrain mean {}",
            experiment.summary.acc_after_mean
        );
    }

    #[test]
    fn private_interaction_counts_budget_resets() {
        let mut config = ExperimentConfig::nonadaptive_baseline(3, 1, 17);
        config.n_points = 6;
        config.fixed_deletes = 3;
        // Capacity 2 with ~6 queries per round forces resets quickly.
        config.privacy = Some(crate::harness::config::PrivacyConfig {
            epsilon: 0.5,
            delta: 0.01,
            eps_prime: 0.05,
        });
        let result = run_trial(&config, 0).unwrap();
        assert!(result.budget_resets >= 1, "resets {}", result.budget_resets);
    }

    #[test]
    fn csv_has_the_fixed_header_and_one_row_per_trial() {
        let mut config = ExperimentConfig::duplicate_pair(3, 2);
        config.n_points = 5;
        let experiment = run_experiment(&config).unwrap();
        let csv = write_csv(&experiment.results);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "trial,indicator,acc_before,acc_after,retrain_total,guess_acc,budget_resets"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn single_trial_summary_wraps_the_trial() {
        let mut config = ExperimentConfig::duplicate_pair(1, 13);
        config.n_points = 8;
        let experiment = run_experiment(&config).unwrap();
        assert_eq!(experiment.results.len(), 1);
        assert_eq!(
            experiment.summary.indicator_mean,
            f64::from(experiment.results[0].indicator)
        );
        assert_eq!(experiment.summary.acc_after_mean, experiment.results[0].acc_after);
    }

    #[test]
    fn two_arm_duplicate_pair_intervals_straddle_the_null() {
        // With the cutoff near the retraining median, the adaptive arm's
        // indicator interval excludes 0.5 while the retrain arm's includes
        // it: the attack falsifies the null, the comparator does not.
        // Oracle for c = 0.68: sum over m ~ Binom(50, 1/3) surviving pairs
        // of P(Binom(m, 2/3) < 0.68 m) = 0.523.
        let mut config = ExperimentConfig::duplicate_pair(200, 77);
        config.cutoff = 0.68;
        let adaptive = run_experiment(&config).unwrap();
        assert!(
            adaptive.summary.indicator_ci_lo > 0.5,
            "adaptive interval [{:.3}, {:.3}]",
            adaptive.summary.indicator_ci_lo,
            adaptive.summary.indicator_ci_hi
        );
        config.arm = Arm::Retrain;
        let retrain = run_experiment(&config).unwrap();
        assert_eq!(retrain.summary.test_outcome, TestOutcome::FailToReject);
    }

    #[test]
    fn baseline_final_states_match_the_fresh_sampler_law() {
        // End-to-end version of the shard-law invariant: run the whole
        // nonadaptive scenario and compare the final shard-0 distribution
        // against fresh sampler draws on D^t, by TV distance.
        use std::collections::BTreeMap;
        let mut config = ExperimentConfig::nonadaptive_baseline(2, 1, 313);
        config.sharding = ShardingMode::Bernoulli { p: 0.5 };
        config.n_points = 2; // two duplicate pairs: ids 0..4
        config.fixed_deletes = 2;
        let trials = 100_000u64;
        let mut unlearned: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut fresh: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut fresh_stream = crate::rng::Stream::from_words(&[313, 99]);
        for trial in 0..trials {
            let mut requester = build_requester(&config, trial).unwrap();
            let (_, state) = run_interaction_full(&config, &mut requester, trial).unwrap();
            let ids: Vec<u64> = state.shards()[0].ids().map(|i| i.0).collect();
            *unlearned.entry(ids).or_insert(0) += 1;
            let draw = crate::ensemble::sampler(state.global(), 0.5, &mut fresh_stream).unwrap();
            *fresh
                .entry(draw.ids().map(|i| i.0).collect())
                .or_insert(0) += 1;
        }
        let keys: std::collections::BTreeSet<_> =
            unlearned.keys().chain(fresh.keys()).cloned().collect();
        let tv: f64 = keys
            .iter()
            .map(|k| {
                let a = *unlearned.get(k).unwrap_or(&0) as f64 / trials as f64;
                let b = *fresh.get(k).unwrap_or(&0) as f64 / trials as f64;
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "TV distance {tv}");
    }

    #[test]
    fn summary_reports_the_test_outcome() {
        let mut config = ExperimentConfig::duplicate_pair(20, 31);
        config.n_points = 10;
        config.ci_method = CiMethod::ClopperPearson;
        let experiment = run_experiment(&config).unwrap();
        // Indicator is 1 in every trial: interval well above 0.5.
        assert_eq!(experiment.summary.test_outcome, TestOutcome::Reject);
        assert_eq!(experiment.summary.indicator_successes, 20);
    }
}
