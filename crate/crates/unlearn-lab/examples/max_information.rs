//! The brute-force max-information oracle on small finite joints, next to
//! the closed-form bound implied by differential privacy.
//!
//! Run with: cargo run --example max_information

use unlearn_lab::guarantees::{maxinfo_bound, BoundConstants};
use unlearn_lab::privacy::{maxinfo_beta, maxinfo_pointwise, JointDistribution};

fn main() -> unlearn_lab::Result<()> {
    let independent = JointDistribution::new(vec![
        (0, 0, 0.25),
        (0, 1, 0.25),
        (1, 0, 0.25),
        (1, 1, 0.25),
    ])?;
    println!("independent joint:      I_0 = {:.6}", maxinfo_pointwise(&independent)?);

    let identity = JointDistribution::new((0..4).map(|i| (i, i, 0.25)).collect())?;
    println!(
        "identity on 4 outcomes: I_0 = {:.6} (ln 4 = {:.6})",
        maxinfo_pointwise(&identity)?,
        4.0f64.ln()
    );

    let noisy = JointDistribution::new(vec![
        (0, 0, 0.375),
        (0, 1, 0.125),
        (1, 0, 0.125),
        (1, 1, 0.375),
    ])?;
    println!("3/4-correlated bit:     I_0 = {:.6} (ln 1.5 = {:.6})", maxinfo_pointwise(&noisy)?, 1.5f64.ln());

    println!("\nbeta-approximate max-information of the correlated bit:");
    for beta in [0.0, 0.1, 0.25, 0.5, 0.75] {
        println!("  beta = {beta:<5} I_beta = {:+.6}", maxinfo_beta(&noisy, beta)?);
    }

    println!("\nDP implies bounded max-information (c1 = c2 = 1):");
    for (eps, delta, m) in [(0.5, 1e-8, 4u32), (0.2, 1e-12, 25), (0.1, 1e-6, 10)] {
        let (eps_prime, delta_prime) = maxinfo_bound(eps, delta, m, BoundConstants::default())?;
        println!(
            "  eps={eps:<4} delta={delta:<6.0e} m={m:<3} -> eps'={eps_prime:.5}, delta'={delta_prime:.5}"
        );
    }
    Ok(())
}
