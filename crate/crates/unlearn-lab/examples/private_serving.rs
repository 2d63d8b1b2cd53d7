//! Differentially private prediction serving: exponential-mechanism votes,
//! budget accounting, and the automatic full-retrain reset that re-draws
//! all shard randomness once the budget is exhausted.
//!
//! Run with: cargo run --example private_serving

use unlearn_lab::data::{DataPoint, Dataset, Update};
use unlearn_lab::ensemble::EnsembleState;
use unlearn_lab::learners::LearnerSpec;
use unlearn_lab::privacy::{
    budget_capacity, exp_mech_probabilities, interaction_step, render_budget_trace,
    BudgetTraceRow, PrivacyBudget,
};
use unlearn_lab::rng::{SeedVector, Stream};

fn main() -> unlearn_lab::Result<()> {
    let (eps, delta, eps_prime) = (0.5, 0.01, 0.05);
    println!(
        "capacity for (eps={eps}, delta={delta}, eps'={eps_prime}): {} queries",
        budget_capacity(eps, delta, eps_prime)?
    );

    let probs = exp_mech_probabilities(&[3, 0], 2.0)?;
    println!("exp-mech over votes (3, 0) at eps'=2: {probs:?}");

    let data = Dataset::from_points(
        2,
        (0..8).map(|i| DataPoint::new(i, vec![i as f64], (i % 2) as usize)),
    )?;
    let mut state = EnsembleState::train_distributed(
        &data,
        3,
        1.0 / 3.0,
        SeedVector::new(11, 3),
        LearnerSpec::Lookup,
    )?;
    let mut budget = PrivacyBudget::new(eps, delta, eps_prime)?;
    let mut mech = Stream::from_words(&[11, 99]);
    let mut fresh = Stream::from_words(&[11, 100]);

    // Each round deletes one point and serves two queries; capacity 2 means
    // a full retrain fires once more than capacity queries have been spent.
    let mut rows = Vec::new();
    for (round, id) in [0u64, 1, 2, 3, 4].into_iter().enumerate() {
        let victim = data.get(unlearn_lab::data::PointId(id)).unwrap().clone();
        let queries = vec![vec![5.0], vec![6.0]];
        use rand::RngCore;
        let outcome = interaction_step(
            &mut state,
            &mut budget,
            &Update::delete(victim),
            &queries,
            SeedVector::new(fresh.next_u64(), 3),
            &mut mech,
        )?;
        rows.push(BudgetTraceRow {
            round: round + 1,
            spent: budget.spent,
            capacity: budget.capacity,
            did_full_retrain: outcome.did_full_retrain,
        });
        println!(
            "round {}: answers {:?}, full retrain: {}",
            round + 1,
            outcome.published,
            outcome.did_full_retrain
        );
    }
    println!("\nbudget trace:\n{}", render_budget_trace(&rows));
    Ok(())
}
