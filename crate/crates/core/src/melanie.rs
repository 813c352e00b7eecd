//! Multi-source online transfer learning for non-stationary streams.
//!
//! Every stream (each source and the target) owns a pool of online ensembles,
//! one per concept detected on that stream. Only the newest ensemble of a pool
//! is trained. Target examples score every sub-classifier of every pool with a
//! margin loss, the scores are accumulated with exponential forgetting, and the
//! sub-classifiers whose normalised performance clears `lambda` share the
//! prediction weight in proportion to that performance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::drift::{Ddm, DdmConfig, DriftLevel};
use crate::ensembles::{EnsembleConfig, OnlineEnsemble};
use crate::error::{Error, Result};
use crate::seeding;
use crate::types::{ClassDistribution, ClassLabel, LabeledExample, StreamId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelanieConfig {
    /// Forgetting factor θ.
    pub theta: f64,
    /// Loss margin δ.
    pub delta: f64,
    /// Performance gate λ.
    pub lambda: f64,
    pub ensemble: EnsembleConfig,
    /// `None` disables drift detection (every stream stays on its first concept).
    pub drift: Option<DdmConfig>,
}

impl MelanieConfig {
    pub fn new(ensemble: EnsembleConfig) -> Self {
        MelanieConfig {
            theta: 0.9,
            delta: 0.05,
            lambda: 0.5,
            ensemble,
            drift: Some(DdmConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta", self.theta), ("delta", self.delta), ("lambda", self.lambda)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        self.ensemble.validate()
    }
}

/// Σ over wrong classes of max(0, P(wrong) − P(true) + δ). Not clamped.
pub fn margin_loss(d: &ClassDistribution, y: ClassLabel, delta: f64) -> f64 {
    let p_true = d.prob(y);
    d.probs()
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != y.index())
        .map(|(_, &p)| (p - p_true + delta).max(0.0))
        .sum()
}

/// Σ_{t=1}^{n} θ^{t−1} in closed form, with θ^0 = 1.
pub fn forgetting_normalizer(theta: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else if theta >= 1.0 {
        n as f64
    } else if theta == 0.0 {
        1.0
    } else {
        (1.0 - theta.powf(n as f64)) / (1.0 - theta)
    }
}

/// ω_i = α_i / Σ_{α_j > λ} α_j when α_i > λ, otherwise 0.
pub fn gate_weights(alphas: &[f64], lambda: f64) -> Vec<f64> {
    let total: f64 = alphas.iter().filter(|&&a| a > lambda).sum();
    alphas
        .iter()
        .map(|&a| if a > lambda && total > 0.0 { a / total } else { 0.0 })
        .collect()
}

/// Melanie bookkeeping for one sub-classifier.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubClassifierRecord {
    /// Decayed performance accumulator A.
    pub accumulator: f64,
    /// Normalised performance α.
    pub alpha: f64,
    /// Prediction weight ω.
    pub omega: f64,
    /// Target examples absorbed into A since creation or the last reset.
    pub n_target: u64,
}

impl SubClassifierRecord {
    pub fn update_performance(&mut self, loss: f64, theta: f64) {
        self.n_target += 1;
        self.accumulator = theta * self.accumulator + (1.0 - loss);
        self.alpha = self.accumulator / forgetting_normalizer(theta, self.n_target);
    }

    pub fn reset(&mut self) {
        *self = SubClassifierRecord::default();
    }
}

/// Ensembles learned on one stream, one per detected concept.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsemblePool {
    stream: StreamId,
    ensembles: Vec<OnlineEnsemble>,
    /// Parallel to `ensembles`: one record per member.
    records: Vec<Vec<SubClassifierRecord>>,
    detector: Option<Ddm>,
    /// Examples used to train each ensemble.
    trained: Vec<u64>,
}

impl EnsemblePool {
    pub fn stream(&self) -> StreamId {
        self.stream
    }

    /// Number of concepts J.
    pub fn len(&self) -> usize {
        self.ensembles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ensembles.is_empty()
    }

    pub fn ensembles(&self) -> &[OnlineEnsemble] {
        &self.ensembles
    }

    pub fn records(&self) -> &[Vec<SubClassifierRecord>] {
        &self.records
    }

    pub fn trained_counts(&self) -> &[u64] {
        &self.trained
    }

    pub fn detector(&self) -> Option<&Ddm> {
        self.detector.as_ref()
    }

    pub fn newest(&self) -> &OnlineEnsemble {
        self.ensembles.last().expect("pools are created with one ensemble")
    }
}

/// Outcome of one [`Melanie::observe`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub first_sighting: bool,
    pub level: DriftLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Melanie {
    config: MelanieConfig,
    pools: BTreeMap<StreamId, EnsemblePool>,
    num_features: usize,
    num_classes: usize,
    seed: u64,
}

impl Melanie {
    pub fn new(config: MelanieConfig, num_features: usize, num_classes: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if num_classes < 2 {
            return Err(Error::InvalidParameter("at least two classes required".into()));
        }
        Ok(Melanie {
            config,
            pools: BTreeMap::new(),
            num_features,
            num_classes,
            seed,
        })
    }

    /// Seed of ensemble `index` (0-based) in the pool of `stream`.
    pub fn ensemble_seed(base: u64, stream: StreamId, index: usize) -> u64 {
        let kind = u64::from(!stream.is_target());
        seeding::derive_seed(base, &[kind, stream.ordinal(), index as u64])
    }

    pub fn config(&self) -> &MelanieConfig {
        &self.config
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn pools(&self) -> &BTreeMap<StreamId, EnsemblePool> {
        &self.pools
    }

    pub fn pool(&self, stream: StreamId) -> Option<&EnsemblePool> {
        self.pools.get(&stream)
    }

    /// Streams seen so far (the set M).
    pub fn seen(&self) -> impl Iterator<Item = StreamId> + '_ {
        self.pools.keys().copied()
    }

    pub fn records(&self) -> impl Iterator<Item = (StreamId, usize, usize, &SubClassifierRecord)> {
        self.pools.iter().flat_map(|(&sid, pool)| {
            pool.records.iter().enumerate().flat_map(move |(j, row)| {
                row.iter().enumerate().map(move |(k, rec)| (sid, j, k, rec))
            })
        })
    }

    fn new_ensemble(&self, stream: StreamId, index: usize) -> OnlineEnsemble {
        OnlineEnsemble::new(
            self.config.ensemble,
            self.num_features,
            self.num_classes,
            Self::ensemble_seed(self.seed, stream, index),
        )
    }

    fn register(&mut self, stream: StreamId) {
        let ensemble = self.new_ensemble(stream, 0);
        let k = ensemble.len();
        self.pools.insert(
            stream,
            EnsemblePool {
                stream,
                ensembles: vec![ensemble],
                records: vec![vec![SubClassifierRecord::default(); k]],
                detector: self.config.drift.map(Ddm::new),
                trained: vec![0],
            },
        );
    }

    /// Opens a new concept on `stream`: appends a fresh ensemble with zeroed
    /// records and, for the target, zeroes every record in every pool.
    pub fn start_new_concept(&mut self, stream: StreamId) {
        if !self.pools.contains_key(&stream) {
            self.register(stream);
        }
        let index = self.pools[&stream].len();
        let ensemble = self.new_ensemble(stream, index);
        let k = ensemble.len();
        let pool = self.pools.get_mut(&stream).expect("registered above");
        pool.ensembles.push(ensemble);
        pool.records.push(vec![SubClassifierRecord::default(); k]);
        pool.trained.push(0);
        if let Some(det) = pool.detector.as_mut() {
            det.reset();
        }
        if stream.is_target() {
            self.reset_weights_all();
        }
    }

    pub fn reset_weights_all(&mut self) {
        for pool in self.pools.values_mut() {
            for row in &mut pool.records {
                row.iter_mut().for_each(SubClassifierRecord::reset);
            }
        }
    }

    pub fn observe(&mut self, stream: StreamId, ex: &LabeledExample) -> Result<Observation> {
        if ex.x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: ex.x.len(),
            });
        }
        ClassLabel::checked(ex.y.index(), self.num_classes)?;

        let first_sighting = !self.pools.contains_key(&stream);
        if first_sighting {
            self.register(stream);
        }

        let pool = self.pools.get_mut(&stream).expect("registered above");
        let mut level = DriftLevel::Stable;
        if let Some(det) = pool.detector.as_mut() {
            let wrong = pool.ensembles.last().expect("non-empty pool").predict_proba(&ex.x).argmax() != ex.y;
            level = det.update(wrong);
        }
        if level == DriftLevel::Drift {
            self.start_new_concept(stream);
        }

        let pool = self.pools.get_mut(&stream).expect("registered above");
        pool.ensembles.last_mut().expect("non-empty pool").train(ex)?;
        *pool.trained.last_mut().expect("non-empty pool") += 1;

        if stream.is_target() {
            self.score_target(ex);
            self.assign_weights();
        }
        Ok(Observation {
            first_sighting,
            level,
        })
    }

    fn score_target(&mut self, ex: &LabeledExample) {
        let (theta, delta) = (self.config.theta, self.config.delta);
        for pool in self.pools.values_mut() {
            for (ensemble, row) in pool.ensembles.iter().zip(pool.records.iter_mut()) {
                for (k, rec) in row.iter_mut().enumerate() {
                    let loss = margin_loss(&ensemble.member_proba(k, &ex.x), ex.y, delta);
                    rec.update_performance(loss, theta);
                }
            }
        }
    }

    /// Recomputes every record's ω from the current α values with [`gate_weights`].
    pub fn assign_weights(&mut self) {
        let alphas: Vec<f64> = self.records().map(|(.., r)| r.alpha).collect();
        let mut omegas = gate_weights(&alphas, self.config.lambda).into_iter();
        for pool in self.pools.values_mut() {
            for row in &mut pool.records {
                for rec in row.iter_mut() {
                    rec.omega = omegas.next().expect("one weight per record");
                }
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.records().map(|(.., r)| r.omega).sum()
    }

    /// Σ ω · P_record(·|x); uniform while every weight is zero.
    pub fn predict_proba(&self, x: &[f64]) -> ClassDistribution {
        let mut votes = vec![0.0; self.num_classes];
        let mut mass = 0.0;
        for pool in self.pools.values() {
            for (ensemble, row) in pool.ensembles.iter().zip(&pool.records) {
                for (k, rec) in row.iter().enumerate() {
                    if rec.omega <= 0.0 {
                        continue;
                    }
                    mass += rec.omega;
                    for (v, p) in votes.iter_mut().zip(ensemble.member_proba(k, x).probs()) {
                        *v += rec.omega * p;
                    }
                }
            }
        }
        if mass > 0.0 {
            ClassDistribution::normalize(&votes).expect("weighted votes are nonnegative")
        } else {
            ClassDistribution::uniform(self.num_classes)
        }
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        self.predict_proba(x).argmax()
    }

    #[cfg(test)]
    pub(crate) fn records_mut(&mut self, stream: StreamId) -> &mut Vec<Vec<SubClassifierRecord>> {
        &mut self.pools.get_mut(&stream).expect("known stream").records
    }
}
