//! Incremental base classifiers.

mod gaussian;
mod hoeffding;
mod naive_bayes;

pub use gaussian::{RunningGaussian, VARIANCE_FLOOR};
pub use hoeffding::{hoeffding_bound, HoeffdingTree, HoeffdingTreeConfig, Node};
pub use naive_bayes::GaussianNaiveBayes;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::types::{ClassDistribution, LabeledExample};

/// Train-one / predict-proba contract shared by every sub-classifier.
pub trait IncrementalClassifier {
    /// Absorbs `ex` with frequency weight `weight` (equivalent to seeing it `weight` times).
    fn learn_weighted(&mut self, ex: &LabeledExample, weight: f64) -> Result<()>;

    fn learn(&mut self, ex: &LabeledExample) -> Result<()> {
        self.learn_weighted(ex, 1.0)
    }

    /// Class distribution for `x`; uniform before any training.
    fn predict_proba(&self, x: &[f64]) -> ClassDistribution;

    /// An untrained copy with the same configuration.
    fn fresh(&self) -> Self
    where
        Self: Sized;

    fn num_classes(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    NaiveBayes,
    HoeffdingTree(HoeffdingTreeConfig),
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig::HoeffdingTree(HoeffdingTreeConfig::default())
    }
}

impl LearnerConfig {
    pub fn build(&self, num_features: usize, num_classes: usize) -> SubClassifier {
        match self {
            LearnerConfig::NaiveBayes => {
                SubClassifier::NaiveBayes(GaussianNaiveBayes::new(num_features, num_classes))
            }
            LearnerConfig::HoeffdingTree(cfg) => {
                SubClassifier::HoeffdingTree(HoeffdingTree::new(num_features, num_classes, *cfg))
            }
        }
    }
}

/// Closed set of sub-classifier types; enum dispatch keeps ensembles `Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq)]
pub enum SubClassifier {
    NaiveBayes(GaussianNaiveBayes),
    HoeffdingTree(HoeffdingTree),
}

impl IncrementalClassifier for SubClassifier {
    fn learn_weighted(&mut self, ex: &LabeledExample, weight: f64) -> Result<()> {
        match self {
            SubClassifier::NaiveBayes(m) => m.learn_weighted(ex, weight),
            SubClassifier::HoeffdingTree(m) => m.learn_weighted(ex, weight),
        }
    }

    fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        match self {
            SubClassifier::NaiveBayes(m) => m.predict_proba(x),
            SubClassifier::HoeffdingTree(m) => m.predict_proba(x),
        }
    }

    fn fresh(&self) -> Self {
        match self {
            SubClassifier::NaiveBayes(m) => SubClassifier::NaiveBayes(m.fresh()),
            SubClassifier::HoeffdingTree(m) => SubClassifier::HoeffdingTree(m.fresh()),
        }
    }

    fn num_classes(&self) -> usize {
        match self {
            SubClassifier::NaiveBayes(m) => m.num_classes(),
            SubClassifier::HoeffdingTree(m) => m.num_classes(),
        }
    }
}
