//! Multi-source online transfer learning for non-stationary data streams.
//!
//! The crate is organised bottom-up:
//!
//! - [`types`]: labels, feature vectors, class distributions, stream ids.
//! - [`learners`]: incremental base classifiers (Gaussian naive Bayes, Hoeffding tree).
//! - [`ensembles`]: Online Bagging and Online Boosting over any base learner.
//! - [`drift`]: the DDM error-rate drift detector.
//! - [`melanie`]: the multi-source transfer ensemble itself.
//! - [`baselines`]: Dynamic Weighted Majority and DDM-reset ensembles.
//! - [`datagen`]: seeded Gaussian scenarios (no drift, abrupt, incremental).
//! - [`ingestion`]: CSV streams and source/target split procedures.
//! - [`evaluation`]: prequential runs, replication and rank statistics.

pub mod approach;
pub mod baselines;
pub mod datagen;
pub mod drift;
pub mod ensembles;
pub mod error;
pub mod evaluation;
pub mod ingestion;
pub mod learners;
pub mod melanie;
pub mod seeding;
pub mod types;

pub use approach::{Approach, ApproachSpec, SourceSelection, StreamLearner};
pub use error::{Error, Result};
pub use types::{ClassDistribution, ClassLabel, FeatureVector, LabeledExample, StreamId};
