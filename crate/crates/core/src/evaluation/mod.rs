//! Prequential evaluation, replication and rank statistics.

mod prequential;
mod stats;

pub use prequential::{
    prequential_run, prequential_run_observed, replicate, window_accuracy, window_accuracy_sized,
    AccuracyTrace, RunSet, RunSummary, TracePoint, DEFAULT_WINDOW_FRACTION,
};
pub use stats::{
    average_ranks, chi_square_critical, friedman_test, nemenyi_cd, sign_test, FriedmanResult,
    SignTest, NEMENYI_Q_05,
};
