//! Train a Bernoulli-sharded ensemble, stream updates through it, and watch
//! which shards retrain.
//!
//! Run with: cargo run --example sharded_unlearning

use unlearn_lab::data::{DataPoint, Dataset, Update};
use unlearn_lab::ensemble::EnsembleState;
use unlearn_lab::guarantees::{retrain_bound, RetrainBoundMode};
use unlearn_lab::learners::LearnerSpec;
use unlearn_lab::rng::SeedVector;

fn main() -> unlearn_lab::Result<()> {
    let k = 5;
    let data = Dataset::from_points(
        2,
        (0..20).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
    )?;

    // p = 1/k: one expected retrain per update.
    let seed = SeedVector::new(42, k);
    let mut state =
        EnsembleState::train_distributed(&data, k, 1.0 / k as f64, seed, LearnerSpec::Lookup)?;
    println!("initial shard sizes: {:?}", shard_sizes(&state));

    for id in [3u64, 7, 11] {
        let victim = data.get(unlearn_lab::data::PointId(id)).unwrap().clone();
        let retrained = state.update_distributed(&Update::delete(victim))?;
        println!("delete id {id}: retrained {retrained} shard model(s)");
    }
    let newcomer = DataPoint::new(100, vec![100.0], 0);
    let retrained = state.update_distributed(&Update::add(newcomer))?;
    println!("add id 100: retrained {retrained} shard model(s)");

    println!("retrain counts per round: {:?}", state.retrain_log().per_round());
    println!(
        "total single-shard training calls: {}",
        state.retrain_log().total()
    );
    let bound = retrain_bound(RetrainBoundMode::NonAdaptive, 0, 0, 0.01, 0.0, 0.0)?;
    println!("nonadaptive 99% per-round bound: {bound:.3}");

    println!(
        "state snapshot:\n{}",
        serde_json::to_string_pretty(&state.snapshot()).unwrap()
    );
    Ok(())
}

fn shard_sizes(state: &EnsembleState) -> Vec<usize> {
    state.shards().iter().map(|s| s.len()).collect()
}
