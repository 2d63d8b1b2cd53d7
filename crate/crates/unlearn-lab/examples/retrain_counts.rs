//! Monte Carlo check of the per-round retrain-count law: with p = 1/k a
//! nonadaptive delete retrains Binomial(k, 1/k) shards, so the mean is 1
//! and the tail bound 1 + sqrt(2 ln(1/xi)) holds at every confidence.
//!
//! Run with: cargo run --example retrain_counts

use unlearn_lab::data::{DataPoint, Dataset, PointId, Update};
use unlearn_lab::ensemble::EnsembleState;
use unlearn_lab::guarantees::{retrain_bound, RetrainBoundMode};
use unlearn_lab::learners::LearnerSpec;
use unlearn_lab::rng::SeedVector;

fn main() -> unlearn_lab::Result<()> {
    let n = 20u64;
    let data = Dataset::from_points(
        2,
        (0..n).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
    )?;

    for k in [5usize, 25] {
        let trajectories = 2000;
        let deletes = 5;
        let mut counts = Vec::with_capacity(trajectories * deletes);
        for trajectory in 0..trajectories {
            let seed = SeedVector::new(trajectory as u64, k);
            let mut state = EnsembleState::train_distributed(
                &data,
                k,
                1.0 / k as f64,
                seed,
                LearnerSpec::Lookup,
            )?;
            for id in 0..deletes as u64 {
                let victim = data.get(PointId(id)).unwrap().clone();
                counts.push(state.update_distributed(&Update::delete(victim))?);
            }
        }
        let total = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / total;
        println!("k = {k}: mean retrains per delete = {mean:.4} (law says 1.0)");
        for xi in [0.1, 0.01] {
            let bound = retrain_bound(RetrainBoundMode::NonAdaptive, 0, 0, xi, 0.0, 0.0)?;
            let exceed = counts.iter().filter(|&&c| c as f64 > bound).count() as f64 / total;
            println!(
                "  xi = {xi:<5} bound = {bound:.3}, exceeded in {:.4} of rounds (allowed {xi})",
                exceed
            );
        }
    }
    Ok(())
}
