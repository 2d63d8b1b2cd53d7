//! The closed-form guarantee calculators: adaptive unlearning parameters
//! from DP publishing, retrain-count bounds, and the attack's minimum
//! dataset size. All logarithms are natural; the theory's unspecified
//! constants default to 1 and are configurable.
//!
//! Run with: cargo run --example guarantee_params

use unlearn_lab::guarantees::{
    adaptive_params, binomial_tail_bound, distributed_params, format_params_table,
    min_n_for_attack, retrain_bound, BoundConstants, RetrainBoundMode, UnlearningParams,
};

fn main() -> unlearn_lab::Result<()> {
    let constants = BoundConstants::default();

    println!("{}", format_params_table(UnlearningParams::zero(), 0.5, 1e-8, 4, constants)?);

    let lifted = adaptive_params(
        UnlearningParams::new(0.1, 0.01, 0.01)?,
        0.5,
        1e-8,
        4,
        constants,
    )?;
    println!(
        "lifting a (0.1, 0.01, 0.01) nonadaptive guarantee: alpha={:.4} beta={:.4} gamma={:.4}\n",
        lifted.alpha, lifted.beta, lifted.gamma
    );

    println!("k-shard guarantees with DP publishing (c1 = c2 = 1):");
    for k in [4, 25, 100] {
        let p = distributed_params(0.2, 1e-12, k, constants)?;
        println!("  k={k:<4} alpha={:<10.5} beta=gamma={:.5}", p.alpha, p.beta);
    }

    println!("\nper-round retrain-count bounds (p = 1/k, 99% confidence):");
    let xi = 0.01;
    println!(
        "  nonadaptive:       {:.3}",
        retrain_bound(RetrainBoundMode::NonAdaptive, 0, 0, xi, 0.0, 0.0)?
    );
    println!(
        "  adaptive (union):  {:.3}  at n+t = 100",
        retrain_bound(RetrainBoundMode::AdaptiveUnion, 99, 1, xi, 0.0, 0.0)?
    );
    println!(
        "  adaptive (min):    {:.3}  at eps' = 0.5, delta' = 1e-3",
        retrain_bound(RetrainBoundMode::AdaptiveMaxInfo, 99, 1, xi, 0.5, 1e-3)?
    );
    println!(
        "  binomial tail, Bin(25, 1/25) at xi = e^-2: {:.3}",
        binomial_tail_bound(25, 1.0 / 25.0, (-2.0f64).exp())?
    );

    println!(
        "\npairs needed for a decisive duplicate-pair attack (gamma=0.05, c=0.1): {}",
        min_n_for_attack(0.05, 0.1)?
    );
    Ok(())
}
