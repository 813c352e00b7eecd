//! Comparison learners: Dynamic Weighted Majority and ensembles reset on DDM drift.

use serde::{Deserialize, Serialize};

use crate::drift::{Ddm, DdmConfig, DriftLevel};
use crate::ensembles::{EnsembleConfig, OnlineEnsemble};
use crate::error::{Error, Result};
use crate::learners::{IncrementalClassifier, LearnerConfig, SubClassifier};
use crate::seeding;
use crate::types::{ClassDistribution, ClassLabel, LabeledExample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwmConfig {
    /// Multiplicative penalty for a wrong expert.
    pub beta: f64,
    /// Weights are updated and experts added/removed every `period` examples.
    pub period: u64,
    pub removal_threshold: f64,
    pub learner: LearnerConfig,
}

impl DwmConfig {
    pub fn new(beta: f64, learner: LearnerConfig) -> Self {
        DwmConfig {
            beta,
            period: 1,
            removal_threshold: 0.01,
            learner,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta = {} outside [0, 1]", self.beta)));
        }
        if self.period == 0 {
            return Err(Error::InvalidParameter("period must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.removal_threshold) {
            return Err(Error::InvalidParameter(format!(
                "removal threshold {} outside [0, 1)",
                self.removal_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expert {
    pub learner: SubClassifier,
    pub weight: f64,
}

/// Dynamic Weighted Majority (Kolter & Maloof). Deterministic given the example sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Dwm {
    config: DwmConfig,
    experts: Vec<Expert>,
    seen: u64,
    num_features: usize,
    num_classes: usize,
}

impl Dwm {
    pub fn new(config: DwmConfig, num_features: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        Ok(Dwm {
            experts: vec![Expert {
                learner: config.learner.build(num_features, num_classes),
                weight: 1.0,
            }],
            config,
            seen: 0,
            num_features,
            num_classes,
        })
    }

    pub fn experts(&self) -> &[Expert] {
        &self.experts
    }

    fn vote(&self, x: &[f64]) -> (ClassLabel, Vec<ClassLabel>) {
        let mut sigma = vec![0.0; self.num_classes];
        let locals: Vec<ClassLabel> = self
            .experts
            .iter()
            .map(|e| {
                let label = e.learner.predict_proba(x).argmax();
                sigma[label.index()] += e.weight;
                label
            })
            .collect();
        let global = ClassDistribution::normalize(&sigma)
            .expect("expert weights are nonnegative")
            .argmax();
        (global, locals)
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        self.vote(x).0
    }

    /// Test-then-train step; returns the global prediction made before any update.
    pub fn observe(&mut self, ex: &LabeledExample) -> Result<ClassLabel> {
        if ex.x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: ex.x.len(),
            });
        }
        self.seen += 1;
        let update_step = self.seen.is_multiple_of(self.config.period);
        let (global, locals) = self.vote(&ex.x);

        if update_step {
            for (expert, &local) in self.experts.iter_mut().zip(&locals) {
                if local != ex.y {
                    expert.weight *= self.config.beta;
                }
            }
            let max = self.experts.iter().map(|e| e.weight).fold(0.0, f64::max);
            if max > 0.0 {
                for e in &mut self.experts {
                    e.weight /= max;
                }
            }
            let threshold = self.config.removal_threshold;
            self.experts.retain(|e| e.weight >= threshold && e.weight > 0.0);
            if global != ex.y || self.experts.is_empty() {
                self.experts.push(Expert {
                    learner: self.config.learner.build(self.num_features, self.num_classes),
                    weight: 1.0,
                });
            }
        }

        for e in &mut self.experts {
            e.learner.learn(ex)?;
        }
        Ok(global)
    }
}

/// An online ensemble that is discarded and rebuilt whenever DDM signals drift.
#[derive(Debug, Clone, PartialEq)]
pub struct DdmReset {
    config: EnsembleConfig,
    ensemble: OnlineEnsemble,
    detector: Ddm,
    seed: u64,
    resets: u64,
    num_features: usize,
    num_classes: usize,
}

impl DdmReset {
    pub fn new(
        config: EnsembleConfig,
        ddm: DdmConfig,
        num_features: usize,
        num_classes: usize,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        Ok(DdmReset {
            ensemble: OnlineEnsemble::new(config, num_features, num_classes, seed),
            config,
            detector: Ddm::new(ddm),
            seed,
            resets: 0,
            num_features,
            num_classes,
        })
    }

    pub fn ensemble(&self) -> &OnlineEnsemble {
        &self.ensemble
    }

    pub fn resets(&self) -> u64 {
        self.resets
    }

    pub fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        self.ensemble.predict_proba(x)
    }

    /// Replaces the ensemble with an untrained one and clears the detector.
    pub fn force_reset(&mut self) {
        self.resets += 1;
        let seed = seeding::derive_seed(self.seed, &[self.resets]);
        self.ensemble = OnlineEnsemble::new(self.config, self.num_features, self.num_classes, seed);
        self.detector.reset();
    }

    pub fn observe(&mut self, ex: &LabeledExample) -> Result<ClassLabel> {
        let predicted = self.ensemble.predict_proba(&ex.x).argmax();
        if self.detector.update(predicted != ex.y) == DriftLevel::Drift {
            self.force_reset();
        }
        self.ensemble.train(ex)?;
        Ok(predicted)
    }
}
