//! Shared domain types and prediction utilities.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of a [`ClassDistribution`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassLabel(pub usize);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn checked(index: usize, num_classes: usize) -> Result<Self> {
        if index < num_classes {
            Ok(ClassLabel(index))
        } else {
            Err(Error::LabelOutOfRange {
                label: index,
                num_classes,
            })
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(FeatureVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One stream observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: FeatureVector,
    pub y: ClassLabel,
    /// Bucket key (day, month, ...) used by the similar-distribution split.
    pub group: Option<u64>,
    /// Arrival index within the originating stream.
    pub seq: u64,
}

impl LabeledExample {
    pub fn new(x: FeatureVector, y: ClassLabel, seq: u64) -> Self {
        LabeledExample {
            x,
            y,
            group: None,
            seq,
        }
    }

    pub fn with_group(mut self, group: u64) -> Self {
        self.group = Some(group);
        self
    }
}

/// Normalized probability vector over class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn uniform(num_classes: usize) -> Self {
        assert!(num_classes >= 1, "a distribution needs at least one class");
        ClassDistribution {
            probs: vec![1.0 / num_classes as f64; num_classes],
        }
    }

    /// Point mass on `label`.
    pub fn certain(label: ClassLabel, num_classes: usize) -> Self {
        let mut probs = vec![0.0; num_classes];
        probs[label.0] = 1.0;
        ClassDistribution { probs }
    }

    /// Scales nonnegative mass to sum to one. All-zero mass maps to uniform.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        let mut sum = 0.0;
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite(value));
            }
            if value < 0.0 {
                return Err(Error::NegativeMass { index, value });
            }
            sum += value;
        }
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty class vector".into()));
        }
        if sum > 0.0 {
            Ok(ClassDistribution {
                probs: raw.iter().map(|v| v / sum).collect(),
            })
        } else {
            Ok(Self::uniform(raw.len()))
        }
    }

    /// Builds from log-scores with the log-sum-exp shift. `-inf` entries get zero mass.
    pub fn from_log_scores(scores: &[f64]) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Self::uniform(scores.len());
        }
        let raw: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let sum: f64 = raw.iter().sum();
        ClassDistribution {
            probs: raw.into_iter().map(|v| v / sum).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: ClassLabel) -> f64 {
        self.probs[label.0]
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    /// Label of maximal probability, lowest index on ties.
    pub fn argmax(&self) -> ClassLabel {
        argmax_class(self)
    }

    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.probs.iter().sum();
        self.probs.iter().all(|p| (0.0..=1.0).contains(p)) && (sum - 1.0).abs() <= SIMPLEX_TOLERANCE
    }
}

pub fn argmax_class(d: &ClassDistribution) -> ClassLabel {
    let mut best = 0;
    for (i, &p) in d.probs.iter().enumerate().skip(1) {
        if p > d.probs[best] {
            best = i;
        }
    }
    ClassLabel(best)
}

/// Identifies a source stream (1-based ordinal) or the single target stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StreamId {
    Source(usize),
    Target,
}

impl StreamId {
    pub fn is_target(self) -> bool {
        matches!(self, StreamId::Target)
    }

    /// Stable ordinal used for seed derivation; target is 0.
    pub fn ordinal(self) -> u64 {
        match self {
            StreamId::Target => 0,
            StreamId::Source(n) => n as u64,
        }
    }
}

impl fmt::Display for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamId::Source(n) => write!(f, "source{n}"),
            StreamId::Target => f.write_str("target"),
        }
    }
}
