//! Synthetic dataset generators for the desk-scale scenarios.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{DataPoint, Dataset};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// `n_pairs` distinct feature vectors, two ids each (2i and 2i+1), equal
/// binary labels within a pair.
pub fn duplicate_pairs(n_pairs: usize) -> Dataset {
    Dataset::from_points(
        2,
        (0..n_pairs).flat_map(|i| {
            let features = vec![i as f64];
            let label = i % 2;
            [
                DataPoint::new(2 * i as u64, features.clone(), label),
                DataPoint::new(2 * i as u64 + 1, features, label),
            ]
        }),
    )
    .expect("generated ids are unique")
}

/// `n_pairs` near-pairs for threshold-NN models: pair members sit `tau/2`
/// apart, different pairs at least `2.5 tau` apart, so a radius-`tau` rule
/// treats pair members as copies and never reaches across pairs.
pub fn threshold_pairs(n_pairs: usize, tau: f64) -> Result<Dataset> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidRange(format!(
            "pair radius must be positive, got {tau}"
        )));
    }
    Dataset::from_points(
        2,
        (0..n_pairs).flat_map(|i| {
            let base = 3.0 * tau * (i + 1) as f64;
            let label = i % 2;
            [
                DataPoint::new(2 * i as u64, vec![base], label),
                DataPoint::new(2 * i as u64 + 1, vec![base + tau / 2.0], label),
            ]
        }),
    )
}

/// Two Gaussian clusters in `dim` dimensions with unit noise: class 0 at
/// -separation/2 and class 1 at +separation/2 along the first axis. Points
/// alternate classes; ids start at `id_offset`.
pub fn two_gaussians(
    n_points: usize,
    dim: usize,
    separation: f64,
    id_offset: u64,
    stream: &mut Stream,
) -> Result<Dataset> {
    if dim == 0 {
        return Err(Error::InvalidRange("dimension must be >= 1".into()));
    }
    Dataset::from_points(
        2,
        (0..n_points).map(|i| {
            let label = i % 2;
            let center = if label == 0 {
                -separation / 2.0
            } else {
                separation / 2.0
            };
            let mut features = vec![0.0; dim];
            features[0] = center;
            for f in features.iter_mut() {
                let noise: f64 = stream.sample(StandardNormal);
                *f += noise;
            }
            DataPoint::new(id_offset + i as u64, features, label)
        }),
    )
}
