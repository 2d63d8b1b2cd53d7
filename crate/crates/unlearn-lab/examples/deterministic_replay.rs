//! Everything is a pure function of the seeds: replaying a trajectory
//! reproduces bit-identical states, and rerunning an experiment reproduces
//! byte-identical CSV output, serial or parallel.
//!
//! Run with: cargo run --example deterministic_replay

use unlearn_lab::data::{DataPoint, Dataset, Update};
use unlearn_lab::ensemble::EnsembleState;
use unlearn_lab::harness::{run_experiment, write_csv, ExperimentConfig};
use unlearn_lab::learners::LearnerSpec;
use unlearn_lab::rng::SeedVector;

fn main() -> unlearn_lab::Result<()> {
    let data = Dataset::from_points(
        2,
        (0..10).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
    )?;
    let updates = vec![
        Update::delete(data.get(unlearn_lab::data::PointId(2)).unwrap().clone()),
        Update::add(DataPoint::new(50, vec![50.0], 1)),
        Update::delete(data.get(unlearn_lab::data::PointId(8)).unwrap().clone()),
    ];

    let replay = || -> unlearn_lab::Result<Vec<String>> {
        let mut state = EnsembleState::train_distributed(
            &data,
            3,
            0.4,
            SeedVector::new(77, 3),
            LearnerSpec::Lookup,
        )?;
        let mut digests = vec![serde_json::to_string(&state.snapshot()).unwrap()];
        for update in &updates {
            state.update_distributed(update)?;
            digests.push(serde_json::to_string(&state.snapshot()).unwrap());
        }
        Ok(digests)
    };
    let first = replay()?;
    let second = replay()?;
    println!(
        "trajectory replay bit-identical over {} rounds: {}",
        first.len(),
        first == second
    );

    let mut config = ExperimentConfig::duplicate_pair(12, 2024);
    config.n_points = 12;
    let serial = write_csv(&run_experiment(&config)?.results);
    config.workers = 4;
    let parallel = write_csv(&run_experiment(&config)?.results);
    println!("serial and 4-worker CSV byte-identical: {}", serial == parallel);
    println!("\nfirst rows:\n{}", serial.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
