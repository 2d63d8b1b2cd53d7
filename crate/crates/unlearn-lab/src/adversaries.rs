//! Update requesters: fixed (nonadaptive) sequences and the adaptive
//! deletion attacks, plus the full-retraining comparator they are judged
//! against.
//!
//! Attacks consume only what the round publishes: the label-only attacks
//! read aggregated per-point predictions, the confidence-targeting attack
//! reads the exposed models. Planned deletions are always emitted in
//! ascending id order.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PointId, Update, UpdateSequence};
use crate::ensemble::{EnsembleState, EnsembleVariant};
use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, Model};
use crate::rng::{SeedVector, Stream};

/// What the system reveals after a round.
#[derive(Debug, Clone)]
pub enum Published {
    /// Aggregated prediction per training point (label-only setting).
    Labels(BTreeMap<PointId, Option<usize>>),
    /// The shard models themselves (full-model setting).
    Models(Vec<Model>),
}

/// An update requester: a sequential state machine fed the latest published
/// object each round, emitting the next update or `None` when done.
#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Requester {
    Fixed(FixedRequester),
    DuplicatePair(DuplicatePairRequester),
    ThresholdPair(ThresholdPairRequester),
    ConfidenceTargeting(ConfidenceTargetingRequester),
}

impl Requester {
    pub fn next_update(&mut self, published: &Published) -> Result<Option<Update>> {
        match self {
            Requester::Fixed(r) => Ok(r.next_update(published)),
            Requester::DuplicatePair(r) => r.next_update(published),
            Requester::ThresholdPair(r) => r.next_update(published),
            Requester::ConfidenceTargeting(r) => r.next_update(published),
        }
    }

    /// Per-point shard guesses, once the confidence-targeting strategy has
    /// planned; `None` for every other strategy.
    pub fn shard_guesses(&self) -> Option<&BTreeMap<PointId, usize>> {
        match self {
            Requester::ConfidenceTargeting(r) => r.guesses.as_ref(),
            _ => None,
        }
    }
}

/// Replays a pre-committed update sequence, ignoring every published
/// object. This is the nonadaptive requester.
#[derive(Debug, Clone)]
pub struct FixedRequester {
    queue: VecDeque<Update>,
}

impl FixedRequester {
    pub fn new(sequence: UpdateSequence) -> Self {
        FixedRequester {
            queue: sequence.0.into(),
        }
    }

    pub fn next_update(&mut self, _published: &Published) -> Option<Update> {
        self.queue.pop_front()
    }
}

/// Checks that `initial` consists of duplicate pairs: every distinct feature
/// vector appears on exactly two ids, both with the same label.
fn validate_duplicate_pairs(initial: &Dataset) -> Result<()> {
    let mut groups: BTreeMap<Vec<u64>, Vec<&crate::data::DataPoint>> = BTreeMap::new();
    for point in initial.points() {
        let key: Vec<u64> = point.features.iter().map(|v| v.to_bits()).collect();
        groups.entry(key).or_default().push(point);
    }
    for group in groups.values() {
        if group.len() != 2 {
            return Err(Error::MalformedPairs(format!(
                "a feature vector appears {} times, expected exactly 2",
                group.len()
            )));
        }
        if group[0].label != group[1].label {
            return Err(Error::MalformedPairs(format!(
                "pair ids {} and {} carry different labels",
                group[0].id, group[1].id
            )));
        }
    }
    Ok(())
}

fn correctly_classified_ids(
    predictions: &BTreeMap<PointId, Option<usize>>,
    initial: &Dataset,
) -> Vec<PointId> {
    initial
        .points()
        .filter(|p| predictions.get(&p.id) == Some(&Some(p.label)))
        .map(|p| p.id)
        .collect()
}

fn deletes_for(initial: &Dataset, ids: &[PointId]) -> UpdateSequence {
    UpdateSequence::new(
        ids.iter()
            .map(|&id| Update::delete(initial.get(id).expect("planned id exists").clone()))
            .collect(),
    )
}

/// Plans the duplicate-pair attack: delete exactly the training points the
/// ensemble classifies correctly, in ascending id order.
pub fn duplicate_pair_attack(
    predictions: &BTreeMap<PointId, Option<usize>>,
    initial: &Dataset,
) -> Result<UpdateSequence> {
    validate_duplicate_pairs(initial)?;
    let correct = correctly_classified_ids(predictions, initial);
    Ok(deletes_for(initial, &correct))
}

/// Plans the threshold-pair attack: delete a uniformly random subset holding
/// `floor(fraction * #correct)` of the correctly classified points, emitted
/// in ascending id order.
pub fn threshold_pair_attack(
    predictions: &BTreeMap<PointId, Option<usize>>,
    initial: &Dataset,
    fraction: f64,
    stream: &mut Stream,
) -> Result<UpdateSequence> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidRange(format!(
            "deletion fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let mut correct = correctly_classified_ids(predictions, initial);
    let take = (fraction * correct.len() as f64).floor() as usize;
    // Partial Fisher-Yates: the first `take` slots become a uniform subset.
    for i in 0..take {
        let j = i + stream.random_range(0..correct.len() - i);
        correct.swap(i, j);
    }
    let mut chosen = correct[..take].to_vec();
    chosen.sort();
    Ok(deletes_for(initial, &chosen))
}

/// Plans the confidence-targeting attack against exposed models: guess each
/// point's shard as the model most confident in its true label (ties to the
/// smallest shard index), then delete every point guessed into the first
/// `floor(k/2)` shards. Returns the deletions and the per-point guesses.
pub fn confidence_targeting_attack(
    models: &[Model],
    initial: &Dataset,
    k: usize,
) -> Result<(UpdateSequence, BTreeMap<PointId, usize>)> {
    if models.len() != k {
        return Err(Error::Config(format!(
            "expected {k} exposed models, got {}",
            models.len()
        )));
    }
    if !k.is_multiple_of(2) {
        log::warn!("confidence targeting with odd k = {k}: targeting the first {} shards", k / 2);
    }
    let targeted_below = k / 2;
    let mut guesses = BTreeMap::new();
    let mut deletions = Vec::new();
    for point in initial.points() {
        let mut best: Option<(usize, f64)> = None;
        for (shard, model) in models.iter().enumerate() {
            let confidence = model.confidence(&point.features)?[point.label];
            // Strict improvement keeps the smallest shard index on ties.
            if best.is_none_or(|(_, c)| confidence > c) {
                best = Some((shard, confidence));
            }
        }
        let (guess, _) = best.expect("at least one model");
        guesses.insert(point.id, guess);
        if guess < targeted_below {
            deletions.push(Update::delete(point.clone()));
        }
    }
    Ok((UpdateSequence::new(deletions), guesses))
}

/// Full retraining from scratch on the current dataset with entirely fresh
/// randomness: the comparator every unlearning guarantee is judged against.
pub fn retrain_baseline(
    data: &Dataset,
    variant: EnsembleVariant,
    k: usize,
    learner: LearnerSpec,
    fresh_seed: SeedVector,
    assign_stream: Option<&mut Stream>,
) -> Result<EnsembleState> {
    match variant {
        EnsembleVariant::Bernoulli { p } => {
            EnsembleState::train_distributed(data, k, p, fresh_seed, learner)
        }
        EnsembleVariant::Partition => {
            let stream = assign_stream.ok_or_else(|| {
                Error::Config("partition retrain baseline needs an assignment stream".into())
            })?;
            EnsembleState::train_partition(data, k, fresh_seed, learner, stream)
        }
    }
}

/// Adaptive requester wrapping [`duplicate_pair_attack`]: plans once from
/// the first published label vector, then drains the planned deletions.
#[derive(Debug)]
pub struct DuplicatePairRequester {
    initial: Dataset,
    planned: Option<VecDeque<Update>>,
}

impl DuplicatePairRequester {
    pub fn new(initial: Dataset) -> Self {
        DuplicatePairRequester {
            initial,
            planned: None,
        }
    }

    pub fn next_update(&mut self, published: &Published) -> Result<Option<Update>> {
        if self.planned.is_none() {
            let Published::Labels(labels) = published else {
                return Err(Error::Config(
                    "duplicate-pair attack consumes published labels".into(),
                ));
            };
            self.planned = Some(duplicate_pair_attack(labels, &self.initial)?.0.into());
        }
        Ok(self.planned.as_mut().unwrap().pop_front())
    }
}

/// Adaptive requester wrapping [`threshold_pair_attack`].
#[derive(Debug)]
pub struct ThresholdPairRequester {
    initial: Dataset,
    fraction: f64,
    stream: Stream,
    planned: Option<VecDeque<Update>>,
}

impl ThresholdPairRequester {
    pub fn new(initial: Dataset, fraction: f64, stream: Stream) -> Self {
        ThresholdPairRequester {
            initial,
            fraction,
            stream,
            planned: None,
        }
    }

    pub fn next_update(&mut self, published: &Published) -> Result<Option<Update>> {
        if self.planned.is_none() {
            let Published::Labels(labels) = published else {
                return Err(Error::Config(
                    "threshold-pair attack consumes published labels".into(),
                ));
            };
            let plan =
                threshold_pair_attack(labels, &self.initial, self.fraction, &mut self.stream)?;
            self.planned = Some(plan.0.into());
        }
        Ok(self.planned.as_mut().unwrap().pop_front())
    }
}

/// Adaptive requester wrapping [`confidence_targeting_attack`]: all guesses
/// are computed once, from the initially published models.
#[derive(Debug)]
pub struct ConfidenceTargetingRequester {
    initial: Dataset,
    k: usize,
    planned: Option<VecDeque<Update>>,
    guesses: Option<BTreeMap<PointId, usize>>,
}

impl ConfidenceTargetingRequester {
    pub fn new(initial: Dataset, k: usize) -> Self {
        ConfidenceTargetingRequester {
            initial,
            k,
            planned: None,
            guesses: None,
        }
    }

    pub fn next_update(&mut self, published: &Published) -> Result<Option<Update>> {
        if self.planned.is_none() {
            let Published::Models(models) = published else {
                return Err(Error::Config(
                    "confidence targeting consumes published models".into(),
                ));
            };
            let (plan, guesses) = confidence_targeting_attack(models, &self.initial, self.k)?;
            self.planned = Some(plan.0.into());
            self.guesses = Some(guesses);
        }
        Ok(self.planned.as_mut().unwrap().pop_front())
    }

    pub fn guesses(&self) -> Option<&BTreeMap<PointId, usize>> {
        self.guesses.as_ref()
    }
}

/// Per-trial attack summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub deleted_ids: Vec<u64>,
    /// Guessed shard per point id, when the strategy guesses shards.
    pub shard_guesses: Option<BTreeMap<u64, usize>>,
    /// Fraction of guesses that hit the point's actual shard.
    pub guess_accuracy: Option<f64>,
    /// Ensemble accuracy on the points remaining after the deletions.
    pub post_deletion_accuracy: f64,
}
