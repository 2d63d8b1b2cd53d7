//! Single-shard learners and their prediction rules.
//!
//! Three pluggable model families: an exact-match lookup table, a
//! threshold-gated nearest neighbor, and a confidence-emitting nearest
//! centroid classifier with optional Gaussian parameter noise.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// A trained single-shard model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Stores the training shard verbatim; predicts the label of an exactly
    /// matching feature vector, abstaining otherwise.
    Lookup { data: Dataset },
    /// Predicts the label of the Euclidean-nearest stored point within
    /// distance `tau`, abstaining otherwise.
    ThresholdNn { data: Dataset, tau: f64 },
    /// Per-class centroids (`None` for classes absent from the shard); emits
    /// softmax confidences over negative squared distances.
    NearestCentroid {
        centroids: Vec<Option<Vec<f64>>>,
        label_count: usize,
    },
}

/// A model output: a class label or an abstention, optionally with a
/// normalized per-class confidence vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `None` is the abstention symbol.
    pub label: Option<usize>,
    pub confidence: Option<Vec<f64>>,
}

impl Prediction {
    pub fn abstain() -> Self {
        Prediction {
            label: None,
            confidence: None,
        }
    }

    pub fn class(label: usize) -> Self {
        Prediction {
            label: Some(label),
            confidence: None,
        }
    }
}

/// Which learner to run on each shard, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LearnerSpec {
    Lookup,
    ThresholdNn { tau: f64 },
    NearestCentroid { sigma: f64 },
}

impl LearnerSpec {
    /// Trains this learner on a shard, drawing any randomness from `stream`.
    /// Deletions may legitimately empty a shard mid-stream; an empty
    /// centroid shard trains to a model that abstains everywhere (the
    /// direct [`train_centroid`] op still rejects empty data).
    pub fn train(&self, data: &Dataset, stream: &mut Stream) -> Result<Model> {
        match *self {
            LearnerSpec::Lookup => Ok(train_lookup(data)),
            LearnerSpec::ThresholdNn { tau } => train_threshold_nn(data, tau),
            LearnerSpec::NearestCentroid { .. } if data.is_empty() => Ok(Model::NearestCentroid {
                centroids: vec![None; data.label_count()],
                label_count: data.label_count(),
            }),
            LearnerSpec::NearestCentroid { sigma } => train_centroid(data, sigma, stream),
        }
    }
}

/// Trains a lookup-table model; the payload is the shard verbatim.
pub fn train_lookup(data: &Dataset) -> Model {
    Model::Lookup { data: data.clone() }
}

/// Trains a threshold nearest-neighbor model.
pub fn train_threshold_nn(data: &Dataset, tau: f64) -> Result<Model> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::NegativeThreshold(tau));
    }
    Ok(Model::ThresholdNn {
        data: data.clone(),
        tau,
    })
}

/// Trains a nearest-centroid model: per-class centroid = class mean plus
/// `sigma`-scaled Gaussian noise per coordinate.
pub fn train_centroid(data: &Dataset, sigma: f64, stream: &mut Stream) -> Result<Model> {
    if data.is_empty() {
        return Err(Error::EmptyClassSet);
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidRange(format!(
            "centroid noise must be nonnegative, got {sigma}"
        )));
    }
    let dim = data.dim().expect("nonempty dataset has a dimension");
    let label_count = data.label_count();
    let mut sums = vec![vec![0.0; dim]; label_count];
    let mut counts = vec![0usize; label_count];
    for point in data.points() {
        counts[point.label] += 1;
        for (s, x) in sums[point.label].iter_mut().zip(&point.features) {
            *s += x;
        }
    }
    let centroids = sums
        .into_iter()
        .zip(&counts)
        .map(|(sum, &count)| {
            if count == 0 {
                return None;
            }
            let mut centroid: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
            if sigma > 0.0 {
                for c in centroid.iter_mut() {
                    let noise: f64 = stream.sample(StandardNormal);
                    *c += sigma * noise;
                }
            }
            Some(centroid)
        })
        .collect();
    Ok(Model::NearestCentroid {
        centroids,
        label_count,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lookup prediction: the label of a stored point whose features equal the
/// query exactly, smallest id first; abstains when none matches.
pub fn predict_lookup(model: &Model, x: &[f64]) -> Result<Prediction> {
    let Model::Lookup { data } = model else {
        return Err(Error::VariantMismatch { expected: "lookup" });
    };
    for point in data.points() {
        if point.features == x {
            return Ok(Prediction::class(point.label));
        }
    }
    Ok(Prediction::abstain())
}

/// Threshold nearest-neighbor prediction: the label of the nearest stored
/// point within `tau`, ties broken by smallest id; abstains otherwise.
pub fn predict_threshold_nn(model: &Model, x: &[f64]) -> Result<Prediction> {
    let Model::ThresholdNn { data, tau } = model else {
        return Err(Error::VariantMismatch {
            expected: "threshold_nn",
        });
    };
    let mut best: Option<(f64, usize)> = None;
    for point in data.points() {
        let d2 = squared_distance(&point.features, x);
        if d2 <= tau * tau {
            // Strict improvement keeps the smallest id on exact-distance ties.
            if best.is_none_or(|(bd, _)| d2 < bd) {
                best = Some((d2, point.label));
            }
        }
    }
    Ok(best.map_or_else(Prediction::abstain, |(_, label)| Prediction::class(label)))
}

/// Nearest-centroid prediction with softmax confidences over negative
/// squared distances; absent classes get zero confidence.
pub fn predict_centroid(model: &Model, x: &[f64]) -> Result<Prediction> {
    let Model::NearestCentroid {
        centroids,
        label_count,
    } = model
    else {
        return Err(Error::VariantMismatch {
            expected: "nearest_centroid",
        });
    };
    let scores: Vec<Option<f64>> = centroids
        .iter()
        .map(|c| c.as_ref().map(|c| -squared_distance(c, x)))
        .collect();
    // A retrained-empty shard has no centroids and abstains.
    let Some(label) = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
        .map(|(i, _)| i)
    else {
        return Ok(Prediction::abstain());
    };
    let max_score = scores
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut confidence = vec![0.0; *label_count];
    let mut total = 0.0;
    for (conf, score) in confidence.iter_mut().zip(&scores) {
        if let Some(s) = score {
            *conf = (s - max_score).exp();
            total += *conf;
        }
    }
    for conf in confidence.iter_mut() {
        *conf /= total;
    }
    Ok(Prediction {
        label: Some(label),
        confidence: Some(confidence),
    })
}

impl Model {
    /// Predicts with whichever rule matches the trained variant.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Model::Lookup { .. } => predict_lookup(self, x),
            Model::ThresholdNn { .. } => predict_threshold_nn(self, x),
            Model::NearestCentroid { .. } => predict_centroid(self, x),
        }
    }

    /// Per-class confidence for the query, for variants that expose one.
    pub fn confidence(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::NearestCentroid { .. } => predict_centroid(self, x)?
                .confidence
                .ok_or(Error::EmptyClassSet),
            Model::Lookup { .. } => Err(Error::NoConfidence("lookup")),
            Model::ThresholdNn { .. } => Err(Error::NoConfidence("threshold_nn")),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Model::Lookup { .. } => "lookup",
            Model::ThresholdNn { .. } => "threshold_nn",
            Model::NearestCentroid { .. } => "nearest_centroid",
        }
    }

    /// Stable digest of the model payload, for trajectory snapshots.
    pub fn digest(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        match self {
            Model::Lookup { data } => {
                0u8.hash(&mut hasher);
                hash_dataset(data, &mut hasher);
            }
            Model::ThresholdNn { data, tau } => {
                1u8.hash(&mut hasher);
                tau.to_bits().hash(&mut hasher);
                hash_dataset(data, &mut hasher);
            }
            Model::NearestCentroid {
                centroids,
                label_count,
            } => {
                2u8.hash(&mut hasher);
                label_count.hash(&mut hasher);
                for centroid in centroids {
                    match centroid {
                        None => 0u8.hash(&mut hasher),
                        Some(c) => {
                            1u8.hash(&mut hasher);
                            for v in c {
                                v.to_bits().hash(&mut hasher);
                            }
                        }
                    }
                }
            }
        }
        hasher.finish()
    }
}

fn hash_dataset(data: &Dataset, hasher: &mut DefaultHasher) {
    data.len().hash(hasher);
    for point in data.points() {
        point.id.0.hash(hasher);
        point.label.hash(hasher);
        for v in &point.features {
            v.to_bits().hash(hasher);
        }
    }
}
