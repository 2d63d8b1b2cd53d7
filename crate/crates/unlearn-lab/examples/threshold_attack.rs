//! The threshold nearest-neighbor variant of the deletion attack: delete a
//! random fraction of the correctly classified points and compare the
//! cutoff-indicator intervals of the adaptive arm against full retraining.
//!
//! Run with: cargo run --example threshold_attack

use unlearn_lab::harness::{run_experiment, Arm, ExperimentConfig};

fn main() -> unlearn_lab::Result<()> {
    println!("fraction  arm       indicator-CI (97.5%)      mean acc after");
    for fraction in [0.25, 0.5, 1.0] {
        let mut intervals = Vec::new();
        for arm in [Arm::Adaptive, Arm::Retrain] {
            let mut config = ExperimentConfig::threshold_pair(fraction, 60, 20240);
            config.arm = arm;
            let experiment = run_experiment(&config)?;
            let s = &experiment.summary;
            println!(
                "{fraction:<9} {arm:<9?} [{:.3}, {:.3}]{:<12} {:.3}",
                s.indicator_ci_lo, s.indicator_ci_hi, "", s.acc_after_mean
            );
            intervals.push((s.indicator_ci_lo, s.indicator_ci_hi));
        }
        let disjoint = intervals[0].0 > intervals[1].1 || intervals[1].0 > intervals[0].1;
        println!("          -> intervals {}", if disjoint { "DISJOINT" } else { "overlap" });
    }
    Ok(())
}
