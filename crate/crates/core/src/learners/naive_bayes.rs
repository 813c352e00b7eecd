use crate::error::{Error, Result};
use crate::types::{ClassDistribution, LabeledExample};

use super::{IncrementalClassifier, RunningGaussian};

/// Gaussian naive Bayes over numeric features.
///
/// Classes never observed get zero posterior mass; the untrained model
/// predicts uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNaiveBayes {
    num_features: usize,
    class_counts: Vec<f64>,
    /// Indexed `[class][feature]`.
    stats: Vec<Vec<RunningGaussian>>,
}

impl GaussianNaiveBayes {
    pub fn new(num_features: usize, num_classes: usize) -> Self {
        GaussianNaiveBayes {
            num_features,
            class_counts: vec![0.0; num_classes],
            stats: vec![vec![RunningGaussian::new(); num_features]; num_classes],
        }
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn class_counts(&self) -> &[f64] {
        &self.class_counts
    }

    pub fn feature_stats(&self, class: usize, feature: usize) -> &RunningGaussian {
        &self.stats[class][feature]
    }

    pub fn total(&self) -> f64 {
        self.class_counts.iter().sum()
    }
}

impl IncrementalClassifier for GaussianNaiveBayes {
    fn learn_weighted(&mut self, ex: &LabeledExample, weight: f64) -> Result<()> {
        if ex.x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: ex.x.len(),
            });
        }
        let c = ex.y.index();
        if c >= self.class_counts.len() {
            return Err(Error::LabelOutOfRange {
                label: c,
                num_classes: self.class_counts.len(),
            });
        }
        for (g, &v) in self.stats[c].iter_mut().zip(ex.x.iter()) {
            g.update_weighted(v, weight)?;
        }
        self.class_counts[c] += weight;
        Ok(())
    }

    fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        let total = self.total();
        if total <= 0.0 {
            return ClassDistribution::uniform(self.class_counts.len());
        }
        let scores: Vec<f64> = self
            .class_counts
            .iter()
            .zip(&self.stats)
            .map(|(&count, per_feature)| {
                if count <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let prior = (count / total).ln();
                prior
                    + per_feature
                        .iter()
                        .zip(x)
                        .map(|(g, &v)| g.log_pdf(v))
                        .sum::<f64>()
            })
            .collect();
        ClassDistribution::from_log_scores(&scores)
    }

    fn fresh(&self) -> Self {
        GaussianNaiveBayes::new(self.num_features, self.class_counts.len())
    }

    fn num_classes(&self) -> usize {
        self.class_counts.len()
    }
}
