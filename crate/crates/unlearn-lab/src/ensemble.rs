//! The sharded learning/unlearning engine.
//!
//! Two sharding variants share one state type: `Bernoulli` draws each shard
//! as an independent inclusion-probability-`p` subsample of the dataset, and
//! `Partition` assigns every point to exactly one shard uniformly at random.
//! Updates touch only the affected shards and retrain their models from
//! scratch on a fresh per-(shard, epoch) stream; everything else is left
//! untouched. The engine also tracks the global dataset and a per-round
//! retrain count log.

use rand::Rng;
use serde::Serialize;

use crate::data::{apply_update, Dataset, PointId, Update, UpdateKind};
use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, Model, Prediction};
use crate::rng::{SeedVector, Stream};

/// How shards are drawn from the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnsembleVariant {
    /// Each shard includes each point independently with probability `p`.
    Bernoulli { p: f64 },
    /// Each point belongs to exactly one uniformly chosen shard.
    Partition,
}

/// Per-round count of single-shard training calls. Round 0 is the initial
/// training (always `k`); later entries satisfy `N^t <= k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrainLog {
    per_round: Vec<usize>,
}

impl RetrainLog {
    fn starting_with(initial: usize) -> Self {
        RetrainLog {
            per_round: vec![initial],
        }
    }

    fn record(&mut self, count: usize) {
        self.per_round.push(count);
    }

    /// Retrain counts per round, starting with round 0.
    pub fn per_round(&self) -> &[usize] {
        &self.per_round
    }

    /// Counts for update rounds only (round >= 1).
    pub fn update_counts(&self) -> &[usize] {
        &self.per_round[1..]
    }

    /// Cumulative single-shard training calls, initial training included.
    pub fn total(&self) -> usize {
        self.per_round.iter().sum()
    }
}

/// Ensemble votes for one query: per-class counts plus the abstention count.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteCounts {
    pub per_class: Vec<u64>,
    pub abstain: u64,
}

impl VoteCounts {
    /// Flat count vector over the full vote alphabet: classes in label
    /// order, abstention last.
    pub fn to_alphabet_vec(&self) -> Vec<u64> {
        let mut counts = self.per_class.clone();
        counts.push(self.abstain);
        counts
    }

    pub fn total(&self) -> u64 {
        self.per_class.iter().sum::<u64>() + self.abstain
    }
}

/// Draws a shard: each point of `data` is included independently with
/// probability `p`, consuming one uniform draw per point in id order.
pub fn sampler(data: &Dataset, p: f64, stream: &mut Stream) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut shard = Dataset::new(data.label_count());
    for point in data.points() {
        if stream.random::<f64>() < p {
            shard.insert(point.clone())?;
        }
    }
    Ok(shard)
}

/// JSON-friendly snapshot of an ensemble state: shard contents by id and
/// model payload digests, for trajectory debugging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub variant: EnsembleVariant,
    pub k: usize,
    pub epochs: Vec<u64>,
    pub global_ids: Vec<u64>,
    pub shard_ids: Vec<Vec<u64>>,
    pub models: Vec<ModelSummary>,
}

/// Model variant name plus a stable payload digest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub variant: String,
    pub digest: String,
}

/// The full algorithm state: the global dataset, `k` shards with their
/// trained models, per-shard epoch counters, and the live random streams.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    variant: EnsembleVariant,
    k: usize,
    learner: LearnerSpec,
    seed: SeedVector,
    global: Dataset,
    shards: Vec<Dataset>,
    models: Vec<Model>,
    epochs: Vec<u64>,
    streams: Vec<Stream>,
    retrain_log: RetrainLog,
}

impl EnsembleState {
    /// Trains the Bernoulli-sampler ensemble: `k` independent shard draws,
    /// one model per shard.
    pub fn train_distributed(
        data: &Dataset,
        k: usize,
        p: f64,
        seed: SeedVector,
        learner: LearnerSpec,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidRange("shard count must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if seed.stream_count() != k {
            return Err(Error::SeedArityMismatch {
                expected: k,
                actual: seed.stream_count(),
            });
        }
        let mut shards = Vec::with_capacity(k);
        let mut models = Vec::with_capacity(k);
        let mut streams = Vec::with_capacity(k);
        for i in 0..k {
            let mut stream = seed.derive_stream(i, 0)?;
            let shard = sampler(data, p, &mut stream)?;
            let model = learner.train(&shard, &mut stream)?;
            shards.push(shard);
            models.push(model);
            streams.push(stream);
        }
        Ok(EnsembleState {
            variant: EnsembleVariant::Bernoulli { p },
            k,
            learner,
            seed,
            global: data.clone(),
            shards,
            models,
            epochs: vec![0; k],
            streams,
            retrain_log: RetrainLog::starting_with(k),
        })
    }

    /// Trains the partition ensemble: every point is assigned to one of the
    /// `k` shards uniformly at random, drawn from `assign_stream`.
    pub fn train_partition(
        data: &Dataset,
        k: usize,
        seed: SeedVector,
        learner: LearnerSpec,
        assign_stream: &mut Stream,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidRange("shard count must be >= 1".into()));
        }
        if seed.stream_count() != k {
            return Err(Error::SeedArityMismatch {
                expected: k,
                actual: seed.stream_count(),
            });
        }
        let mut shards = vec![Dataset::new(data.label_count()); k];
        for point in data.points() {
            let target = assign_stream.random_range(0..k);
            shards[target].insert(point.clone())?;
        }
        let mut models = Vec::with_capacity(k);
        let mut streams = Vec::with_capacity(k);
        for (i, shard) in shards.iter().enumerate() {
            let mut stream = seed.derive_stream(i, 0)?;
            models.push(learner.train(shard, &mut stream)?);
            streams.push(stream);
        }
        Ok(EnsembleState {
            variant: EnsembleVariant::Partition,
            k,
            learner,
            seed,
            global: data.clone(),
            shards,
            models,
            epochs: vec![0; k],
            streams,
            retrain_log: RetrainLog::starting_with(k),
        })
    }

    pub fn variant(&self) -> EnsembleVariant {
        self.variant
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn learner(&self) -> LearnerSpec {
        self.learner
    }

    /// The current global dataset `D^t`.
    pub fn global(&self) -> &Dataset {
        &self.global
    }

    pub fn shards(&self) -> &[Dataset] {
        &self.shards
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn retrain_log(&self) -> &RetrainLog {
        &self.retrain_log
    }

    /// Shards currently containing the id, in shard order.
    pub fn shards_containing(&self, id: PointId) -> Vec<usize> {
        (0..self.k)
            .filter(|&i| self.shards[i].contains(id))
            .collect()
    }

    fn retrain_shard(&mut self, i: usize) -> Result<()> {
        self.epochs[i] += 1;
        let mut stream = self.seed.derive_stream(i, self.epochs[i])?;
        self.models[i] = self.learner.train(&self.shards[i], &mut stream)?;
        self.streams[i] = stream;
        Ok(())
    }

    /// One unlearning round of the Bernoulli variant. A delete removes the
    /// point from every shard containing it; an add gives each shard an
    /// independent Bernoulli(p) membership draw from its current stream.
    /// Affected shards are retrained on fresh epoch streams. Returns the
    /// number of retrained shards.
    pub fn update_distributed(&mut self, update: &Update) -> Result<usize> {
        let EnsembleVariant::Bernoulli { p } = self.variant else {
            return Err(Error::VariantMismatch {
                expected: "bernoulli",
            });
        };
        self.global = apply_update(&self.global, update)?;
        let affected: Vec<usize> = match update.kind {
            UpdateKind::Delete => self.shards_containing(update.point.id),
            UpdateKind::Add => (0..self.k)
                .filter(|&i| self.streams[i].random::<f64>() < p)
                .collect(),
        };
        for &i in &affected {
            self.shards[i] = apply_update(&self.shards[i], update)?;
            self.retrain_shard(i)?;
        }
        self.retrain_log.record(affected.len());
        Ok(affected.len())
    }

    /// One unlearning round of the partition variant: the unique containing
    /// shard (delete) or a uniformly chosen shard (add) is updated and
    /// retrained. Always retrains exactly one shard.
    pub fn update_partition(&mut self, update: &Update, stream: &mut Stream) -> Result<usize> {
        if self.variant != EnsembleVariant::Partition {
            return Err(Error::VariantMismatch {
                expected: "partition",
            });
        }
        self.global = apply_update(&self.global, update)?;
        let target = match update.kind {
            UpdateKind::Delete => *self
                .shards_containing(update.point.id)
                .first()
                .expect("partition shards cover the global dataset"),
            UpdateKind::Add => stream.random_range(0..self.k),
        };
        self.shards[target] = apply_update(&self.shards[target], update)?;
        self.retrain_shard(target)?;
        self.retrain_log.record(1);
        Ok(1)
    }

    /// Applies an update to the global dataset only, leaving shards stale.
    /// Used by full-retrain rounds that immediately rebuild every shard.
    pub(crate) fn apply_global_only(&mut self, update: &Update) -> Result<()> {
        self.global = apply_update(&self.global, update)?;
        Ok(())
    }

    /// Discards all shard state and retrains from scratch on the current
    /// global dataset with an entirely fresh seed. The partition variant
    /// additionally needs an assignment stream.
    pub fn full_retrain(
        &mut self,
        fresh_seed: SeedVector,
        assign_stream: Option<&mut Stream>,
    ) -> Result<()> {
        if fresh_seed.stream_count() != self.k {
            return Err(Error::SeedArityMismatch {
                expected: self.k,
                actual: fresh_seed.stream_count(),
            });
        }
        let rebuilt = match self.variant {
            EnsembleVariant::Bernoulli { p } => {
                EnsembleState::train_distributed(&self.global, self.k, p, fresh_seed, self.learner)?
            }
            EnsembleVariant::Partition => {
                let stream = assign_stream.ok_or_else(|| {
                    Error::Config("partition full retrain needs an assignment stream".into())
                })?;
                EnsembleState::train_partition(
                    &self.global,
                    self.k,
                    fresh_seed,
                    self.learner,
                    stream,
                )?
            }
        };
        self.seed = fresh_seed;
        self.shards = rebuilt.shards;
        self.models = rebuilt.models;
        self.epochs = rebuilt.epochs;
        self.streams = rebuilt.streams;
        self.retrain_log.record(self.k);
        Ok(())
    }

    /// Collects the k model votes for a query.
    pub fn vote_counts(&self, x: &[f64]) -> Result<VoteCounts> {
        let mut per_class = vec![0u64; self.global.label_count()];
        let mut abstain = 0u64;
        for model in &self.models {
            match model.predict(x)?.label {
                Some(label) => per_class[label] += 1,
                None => abstain += 1,
            }
        }
        Ok(VoteCounts { per_class, abstain })
    }

    /// Plurality vote over the k models. Abstentions vote as their own
    /// symbol; label ties go to the smallest label index, and abstention
    /// loses every tie.
    pub fn aggregate_majority(&self, x: &[f64]) -> Result<Prediction> {
        let votes = self.vote_counts(x)?;
        let best = votes
            .per_class
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
            .map(|(label, &count)| (label, count));
        Ok(match best {
            Some((label, count)) if count > 0 && votes.abstain <= count => {
                Prediction::class(label)
            }
            _ => Prediction::abstain(),
        })
    }

    /// Ensemble majority-vote accuracy on an evaluation set. An abstention
    /// never counts as correct; the empty set scores 0.
    pub fn accuracy(&self, eval: &Dataset) -> Result<f64> {
        if eval.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for point in eval.points() {
            if self.aggregate_majority(&point.features)?.label == Some(point.label) {
                correct += 1;
            }
        }
        Ok(correct as f64 / eval.len() as f64)
    }

    /// Accuracy of a single shard model on an evaluation set.
    pub fn model_accuracy(&self, shard: usize, eval: &Dataset) -> Result<f64> {
        if shard >= self.k {
            return Err(Error::IndexOutOfRange {
                index: shard,
                count: self.k,
            });
        }
        if eval.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for point in eval.points() {
            if self.models[shard].predict(&point.features)?.label == Some(point.label) {
                correct += 1;
            }
        }
        Ok(correct as f64 / eval.len() as f64)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            variant: self.variant,
            k: self.k,
            epochs: self.epochs.clone(),
            global_ids: self.global.ids().map(|id| id.0).collect(),
            shard_ids: self
                .shards
                .iter()
                .map(|s| s.ids().map(|id| id.0).collect())
                .collect(),
            models: self
                .models
                .iter()
                .map(|m| ModelSummary {
                    variant: m.variant_name().into(),
                    digest: format!("{:016x}", m.digest()),
                })
                .collect(),
        }
    }
}
