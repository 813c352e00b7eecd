//! Uniform driver interface over Melanie and the comparison learners.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::baselines::{DdmReset, Dwm, DwmConfig};
use crate::datagen::Scenario;
use crate::drift::DdmConfig;
use crate::ensembles::{EnsembleConfig, OnlineEnsemble};
use crate::error::Result;
use crate::melanie::{Melanie, MelanieConfig};
use crate::types::{ClassLabel, LabeledExample, StreamId};

/// Something the prequential evaluator can drive.
pub trait StreamLearner {
    fn predict(&self, x: &[f64]) -> ClassLabel;

    fn observe(&mut self, stream: StreamId, ex: &LabeledExample) -> Result<()>;

    /// Whether source examples should be routed to [`observe`](Self::observe).
    fn consumes_sources(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSelection {
    All,
    None,
    /// 1-based source ordinals.
    Only(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproachSpec {
    Melanie {
        config: MelanieConfig,
        sources: SourceSelection,
    },
    /// Plain Online Bagging / Boosting.
    Ensemble {
        ensemble: EnsembleConfig,
        #[serde(default)]
        pooled: bool,
    },
    /// Ensemble rebuilt on every DDM drift.
    DdmEnsemble {
        ensemble: EnsembleConfig,
        ddm: DdmConfig,
        #[serde(default)]
        pooled: bool,
    },
    Dwm {
        config: DwmConfig,
        #[serde(default)]
        pooled: bool,
    },
}

impl ApproachSpec {
    /// Everything except DWM draws random numbers.
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, ApproachSpec::Dwm { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ApproachSpec::Melanie { config, .. } => config.validate(),
            ApproachSpec::Ensemble { ensemble, .. } | ApproachSpec::DdmEnsemble { ensemble, .. } => {
                ensemble.validate()
            }
            ApproachSpec::Dwm { config, .. } => config.validate(),
        }
    }

    /// The scenario as this approach should see it (source selection applied).
    pub fn view<'a>(&self, scenario: &'a Scenario) -> Cow<'a, Scenario> {
        match self {
            ApproachSpec::Melanie {
                sources: SourceSelection::None,
                ..
            } => Cow::Owned(scenario.without_sources()),
            ApproachSpec::Melanie {
                sources: SourceSelection::Only(keep),
                ..
            } => Cow::Owned(scenario.with_sources(keep)),
            _ => Cow::Borrowed(scenario),
        }
    }

    /// Builds a fresh learner. Single-ensemble approaches use the same seed as
    /// Melanie's first target ensemble, so runs sharing a seed are comparable.
    pub fn build(&self, num_features: usize, num_classes: usize, seed: u64) -> Result<Approach> {
        let ensemble_seed = Melanie::ensemble_seed(seed, StreamId::Target, 0);
        Ok(match self {
            ApproachSpec::Melanie { config, .. } => {
                Approach::Melanie(Melanie::new(*config, num_features, num_classes, seed)?)
            }
            ApproachSpec::Ensemble { ensemble, pooled } => {
                ensemble.validate()?;
                Approach::Ensemble {
                    model: OnlineEnsemble::new(*ensemble, num_features, num_classes, ensemble_seed),
                    pooled: *pooled,
                }
            }
            ApproachSpec::DdmEnsemble {
                ensemble,
                ddm,
                pooled,
            } => Approach::DdmReset {
                model: DdmReset::new(*ensemble, *ddm, num_features, num_classes, ensemble_seed)?,
                pooled: *pooled,
            },
            ApproachSpec::Dwm { config, pooled } => Approach::Dwm {
                model: Dwm::new(*config, num_features, num_classes)?,
                pooled: *pooled,
            },
        })
    }
}

#[derive(Debug, Clone)]
pub enum Approach {
    Melanie(Melanie),
    Ensemble { model: OnlineEnsemble, pooled: bool },
    DdmReset { model: DdmReset, pooled: bool },
    Dwm { model: Dwm, pooled: bool },
}

impl StreamLearner for Approach {
    fn predict(&self, x: &[f64]) -> ClassLabel {
        match self {
            Approach::Melanie(m) => m.predict(x),
            Approach::Ensemble { model, .. } => model.predict_proba(x).argmax(),
            Approach::DdmReset { model, .. } => model.predict_proba(x).argmax(),
            Approach::Dwm { model, .. } => model.predict(x),
        }
    }

    fn observe(&mut self, stream: StreamId, ex: &LabeledExample) -> Result<()> {
        match self {
            Approach::Melanie(m) => m.observe(stream, ex).map(|_| ()),
            Approach::Ensemble { model, .. } => model.train(ex),
            Approach::DdmReset { model, .. } => model.observe(ex).map(|_| ()),
            Approach::Dwm { model, .. } => model.observe(ex).map(|_| ()),
        }
    }

    fn consumes_sources(&self) -> bool {
        match self {
            Approach::Melanie(_) => true,
            Approach::Ensemble { pooled, .. }
            | Approach::DdmReset { pooled, .. }
            | Approach::Dwm { pooled, .. } => *pooled,
        }
    }
}
