//! Walk through one duplicate-pair attack trial: the adversary deletes
//! exactly the training points the ensemble classifies correctly, driving
//! training accuracy to zero, while full retraining would recover ~2/3.
//!
//! Run with: cargo run --example duplicate_pair_attack

use unlearn_lab::adversaries::{duplicate_pair_attack, retrain_baseline, AttackReport};
use unlearn_lab::data::apply_sequence;
use unlearn_lab::ensemble::{EnsembleState, EnsembleVariant};
use unlearn_lab::guarantees::{min_n_for_attack, retrain_event_probability};
use unlearn_lab::harness::synth::duplicate_pairs;
use unlearn_lab::learners::LearnerSpec;
use unlearn_lab::rng::{SeedVector, Stream};

fn main() -> unlearn_lab::Result<()> {
    let n_pairs = 50;
    let data = duplicate_pairs(n_pairs);
    let mut assign = Stream::from_words(&[2024, 1]);
    let mut state = EnsembleState::train_partition(
        &data,
        3,
        SeedVector::new(7, 3),
        LearnerSpec::Lookup,
        &mut assign,
    )?;
    println!("training accuracy before attack: {:.4}", state.accuracy(&data)?);

    // The adversary sees only the aggregated labels per point.
    let mut published = std::collections::BTreeMap::new();
    for point in data.points() {
        published.insert(point.id, state.aggregate_majority(&point.features)?.label);
    }
    let plan = duplicate_pair_attack(&published, &data)?;
    println!("attack deletes {} of {} points", plan.len(), data.len());

    for update in plan.iter() {
        state.update_partition(update, &mut assign)?;
    }
    let remaining = apply_sequence(&data, &plan)?;
    println!(
        "training accuracy after attack:  {:.4}",
        state.accuracy(&remaining)?
    );

    let baseline = retrain_baseline(
        &remaining,
        EnsembleVariant::Partition,
        3,
        LearnerSpec::Lookup,
        SeedVector::new(999, 3),
        Some(&mut Stream::from_words(&[2024, 2])),
    )?;
    println!(
        "full-retraining accuracy on same data: {:.4}",
        baseline.accuracy(&remaining)?
    );

    let survivors = n_pairs as u64 - plan.len() as u64 / 2;
    println!(
        "P[retraining reproduces the all-co-sharded event] = 3^-{survivors} = {:.3e}",
        retrain_event_probability(survivors, 0, 3)?
    );
    println!(
        "pairs needed to refute (alpha, 0.2, 0.05)-unlearning at c = 0.1: {}",
        min_n_for_attack(0.05, 0.1)?
    );

    let report = AttackReport {
        deleted_ids: plan.iter().map(|u| u.point.id.0).collect(),
        shard_guesses: None,
        guess_accuracy: None,
        post_deletion_accuracy: state.accuracy(&remaining)?,
    };
    println!("\nattack report:\n{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
