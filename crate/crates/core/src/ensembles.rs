//! Online Bagging and Online Boosting (Oza & Russell).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{IncrementalClassifier, LearnerConfig, SubClassifier};
use crate::seeding;
use crate::types::{ClassDistribution, LabeledExample};

/// Above this rate the product-of-uniforms loop gets long; a normal approximation is used instead.
const POISSON_DIRECT_LIMIT: f64 = 200.0;

/// Draws k ~ Poisson(λ) by multiplying uniforms until the product falls below e^{-λ}.
pub fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    // also catches NaN
    if lambda.is_nan() || lambda <= 0.0 {
        return 0;
    }
    if lambda > POISSON_DIRECT_LIMIT {
        // Box–Muller, rounded and truncated at zero
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        return (lambda + lambda.sqrt() * z).round().max(0.0) as u64;
    }
    let limit = (-lambda).exp();
    let mut k = 0;
    let mut product: f64 = rng.gen();
    while product > limit {
        k += 1;
        product *= rng.gen::<f64>();
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Bagging,
    Boosting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
    /// Number of members K.
    pub size: usize,
    pub learner: LearnerConfig,
    /// Boosting error estimates are clamped to `[clamp, 1 - clamp]`.
    pub error_clamp: f64,
}

impl EnsembleConfig {
    pub fn new(kind: EnsembleKind, size: usize, learner: LearnerConfig) -> Self {
        EnsembleConfig {
            kind,
            size,
            learner,
            error_clamp: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidParameter("ensemble size must be at least 1".into()));
        }
        if !(self.error_clamp > 0.0 && self.error_clamp < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "error clamp {} outside (0, 0.5)",
                self.error_clamp
            )));
        }
        Ok(())
    }
}

/// K sub-classifiers trained by Poisson resampling. Each member draws from its own
/// ChaCha stream, so replaying a seed replays every draw.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineEnsemble {
    config: EnsembleConfig,
    members: Vec<SubClassifier>,
    rngs: Vec<ChaCha8Rng>,
    /// Boosting: mass of correctly classified examples per member.
    lambda_correct: Vec<f64>,
    /// Boosting: mass of misclassified examples per member.
    lambda_wrong: Vec<f64>,
    num_classes: usize,
}

impl OnlineEnsemble {
    pub fn new(config: EnsembleConfig, num_features: usize, num_classes: usize, seed: u64) -> Self {
        let size = config.size.max(1);
        OnlineEnsemble {
            members: (0..size)
                .map(|_| config.learner.build(num_features, num_classes))
                .collect(),
            rngs: (0..size).map(|m| seeding::rng_stream(seed, m as u64)).collect(),
            lambda_correct: vec![0.0; size],
            lambda_wrong: vec![0.0; size],
            config,
            num_classes,
        }
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn kind(&self) -> EnsembleKind {
        self.config.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[SubClassifier] {
        &self.members
    }

    pub fn member_proba(&self, member: usize, x: &[f64]) -> ClassDistribution {
        self.members[member].predict_proba(x)
    }

    pub fn lambda_correct(&self) -> &[f64] {
        &self.lambda_correct
    }

    pub fn lambda_wrong(&self) -> &[f64] {
        &self.lambda_wrong
    }

    /// Clamped boosting error ε_m; `None` before the member has seen any mass.
    pub fn member_error(&self, member: usize) -> Option<f64> {
        let total = self.lambda_correct[member] + self.lambda_wrong[member];
        (total > 0.0).then(|| self.clamp_error(self.lambda_wrong[member] / total))
    }

    fn clamp_error(&self, eps: f64) -> f64 {
        let c = self.config.error_clamp;
        eps.clamp(c, 1.0 - c)
    }

    pub fn train(&mut self, ex: &LabeledExample) -> Result<()> {
        match self.config.kind {
            EnsembleKind::Bagging => self.bag_train(ex),
            EnsembleKind::Boosting => self.boost_train(ex),
        }
    }

    fn bag_train(&mut self, ex: &LabeledExample) -> Result<()> {
        for (member, rng) in self.members.iter_mut().zip(&mut self.rngs) {
            let k = poisson_draw(rng, 1.0);
            if k > 0 {
                member.learn_weighted(ex, k as f64)?;
            }
        }
        Ok(())
    }

    fn boost_train(&mut self, ex: &LabeledExample) -> Result<()> {
        let mut lambda = 1.0;
        for m in 0..self.members.len() {
            let k = poisson_draw(&mut self.rngs[m], lambda);
            if k > 0 {
                self.members[m].learn_weighted(ex, k as f64)?;
            }
            let correct = self.members[m].predict_proba(&ex.x).argmax() == ex.y;
            if correct {
                self.lambda_correct[m] += lambda;
            } else {
                self.lambda_wrong[m] += lambda;
            }
            let total = self.lambda_correct[m] + self.lambda_wrong[m];
            let eps = self.clamp_error(self.lambda_wrong[m] / total);
            lambda *= if correct {
                1.0 / (2.0 * (1.0 - eps))
            } else {
                1.0 / (2.0 * eps)
            };
        }
        Ok(())
    }

    /// Trains member `m` with weight `counts[m]`, bypassing the Poisson draws.
    pub fn train_with_counts(&mut self, ex: &LabeledExample, counts: &[u64]) -> Result<()> {
        if counts.len() != self.members.len() {
            return Err(Error::InvalidParameter(format!(
                "{} counts for {} members",
                counts.len(),
                self.members.len()
            )));
        }
        for (member, &k) in self.members.iter_mut().zip(counts) {
            if k > 0 {
                member.learn_weighted(ex, k as f64)?;
            }
        }
        Ok(())
    }

    /// Bagging: member average. Boosting: members weighted by ln((1−ε)/ε), floored at 0.
    pub fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        let weights: Vec<f64> = match self.config.kind {
            EnsembleKind::Bagging => vec![1.0; self.members.len()],
            EnsembleKind::Boosting => (0..self.members.len())
                .map(|m| {
                    self.member_error(m)
                        .map_or(0.0, |eps| ((1.0 - eps) / eps).ln().max(0.0))
                })
                .collect(),
        };
        let mut votes = vec![0.0; self.num_classes];
        for (member, &w) in self.members.iter().zip(&weights) {
            if w == 0.0 {
                continue;
            }
            for (v, p) in votes.iter_mut().zip(member.predict_proba(x).probs()) {
                *v += w * p;
            }
        }
        ClassDistribution::normalize(&votes).expect("weights and probabilities are nonnegative")
    }
}
