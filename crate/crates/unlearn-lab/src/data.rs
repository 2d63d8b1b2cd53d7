//! Labeled datasets and the add/delete update algebra.
//!
//! A dataset is a multiset of feature vectors keyed by unique point ids.
//! Duplicate feature vectors are distinct points with distinct ids, and a
//! delete targets exactly one id, so constructions that rely on two
//! distinguishable copies of the same example work unambiguously.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque unique identifier of a data point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u64);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A labeled feature vector with a unique id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub id: PointId,
    pub features: Vec<f64>,
    pub label: usize,
}

impl DataPoint {
    pub fn new(id: u64, features: Vec<f64>, label: usize) -> Self {
        DataPoint {
            id: PointId(id),
            features,
            label,
        }
    }
}

/// An id-keyed multiset of data points with a fixed feature dimension and a
/// declared number of classes.
///
/// Serializes as an id-sorted JSON array of `{id, features, label}` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: BTreeMap<PointId, DataPoint>,
    dim: Option<usize>,
    label_count: usize,
}

impl Dataset {
    /// An empty dataset over `label_count` classes. The feature dimension is
    /// fixed by the first inserted point.
    pub fn new(label_count: usize) -> Self {
        Dataset {
            points: BTreeMap::new(),
            dim: None,
            label_count,
        }
    }

    /// Builds a dataset from points, validating id uniqueness, dimension
    /// constancy, and label range.
    pub fn from_points(
        label_count: usize,
        points: impl IntoIterator<Item = DataPoint>,
    ) -> Result<Self> {
        let mut dataset = Dataset::new(label_count);
        for point in points {
            dataset.insert(point)?;
        }
        Ok(dataset)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Feature dimension, or `None` while the dataset is empty.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.points.contains_key(&id)
    }

    pub fn get(&self, id: PointId) -> Option<&DataPoint> {
        self.points.get(&id)
    }

    /// Points in ascending id order.
    pub fn points(&self) -> impl Iterator<Item = &DataPoint> {
        self.points.values()
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.points.keys().copied()
    }

    /// Inserts a point. Adding an id that already exists is rejected rather
    /// than silently forming an id-level multiset.
    pub fn insert(&mut self, point: DataPoint) -> Result<()> {
        if self.points.contains_key(&point.id) {
            return Err(Error::AddDuplicateId { id: point.id.0 });
        }
        if point.label >= self.label_count {
            return Err(Error::LabelOutOfRange {
                label: point.label,
                label_count: self.label_count,
            });
        }
        match self.dim {
            None => self.dim = Some(point.features.len()),
            Some(d) if d != point.features.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: point.features.len(),
                });
            }
            Some(_) => {}
        }
        self.points.insert(point.id, point);
        Ok(())
    }

    /// Removes the point with the given id.
    pub fn remove(&mut self, id: PointId) -> Result<DataPoint> {
        self.points
            .remove(&id)
            .ok_or(Error::DeleteAbsent { id: id.0 })
    }
}

impl Serialize for Dataset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.points.values())
    }
}

impl<'de> Deserialize<'de> for Dataset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<DataPoint>::deserialize(deserializer)?;
        let label_count = points.iter().map(|p| p.label + 1).max().unwrap_or(0);
        Dataset::from_points(label_count, points).map_err(serde::de::Error::custom)
    }
}

/// Update kind: add a new point or delete an existing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateKind {
    Add,
    Delete,
}

/// A single update request: a point paired with an add/delete marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Update {
    pub point: DataPoint,
    pub kind: UpdateKind,
}

impl Update {
    pub fn add(point: DataPoint) -> Self {
        Update {
            point,
            kind: UpdateKind::Add,
        }
    }

    pub fn delete(point: DataPoint) -> Self {
        Update {
            point,
            kind: UpdateKind::Delete,
        }
    }
}

/// An ordered sequence of updates; may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateSequence(pub Vec<Update>);

impl UpdateSequence {
    pub fn new(updates: Vec<Update>) -> Self {
        UpdateSequence(updates)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Update> {
        self.0.iter()
    }
}

/// What to do when a delete targets an absent id. `Strict` treats it as a
/// malformed requester; `IgnoreAbsent` downgrades it to a no-op for fuzzing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletePolicy {
    #[default]
    Strict,
    IgnoreAbsent,
}

/// Applies one update, returning the updated dataset. Add appends exactly one
/// point; delete removes exactly the point with the matching id.
pub fn apply_update(dataset: &Dataset, update: &Update) -> Result<Dataset> {
    apply_update_policy(dataset, update, DeletePolicy::Strict)
}

/// [`apply_update`] with an explicit policy for deletes of absent ids.
pub fn apply_update_policy(
    dataset: &Dataset,
    update: &Update,
    policy: DeletePolicy,
) -> Result<Dataset> {
    let mut next = dataset.clone();
    match update.kind {
        UpdateKind::Add => next.insert(update.point.clone())?,
        UpdateKind::Delete => match next.remove(update.point.id) {
            Ok(_) => {}
            Err(Error::DeleteAbsent { .. }) if policy == DeletePolicy::IgnoreAbsent => {}
            Err(e) => return Err(e),
        },
    }
    Ok(next)
}

/// Left-fold of [`apply_update`] over the sequence. A failing step reports
/// its index.
pub fn apply_sequence(dataset: &Dataset, updates: &UpdateSequence) -> Result<Dataset> {
    let mut current = dataset.clone();
    for (index, update) in updates.iter().enumerate() {
        current = apply_update(&current, update).map_err(|source| Error::SequenceStep {
            index,
            source: Box::new(source),
        })?;
    }
    Ok(current)
}
