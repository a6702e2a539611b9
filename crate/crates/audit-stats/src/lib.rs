//! Numerical kernels for the audit harness: inequality metrics, bootstrap
//! resampling, and the hypothesis tests used by the analysis layer.
//!
//! All kernels are generic over the float type via [`num_traits::Float`];
//! the crate root exposes `f64` aliases, which the rest of the workspace
//! uses. Distribution CDFs are evaluated in `f64` internally.

mod bootstrap;
mod gini;
mod ratio;

pub use bootstrap::{bootstrap, BootstrapSummary};
pub use gini::{gini, gini_mean_abs_diff};
pub use ratio::{format_percent, modification_ratio};
pub use tests::{chi_square_independence, spearman, welch_t};

use thiserror::Error;

/// Concrete summary type used by the harness.
pub type BootstrapSummary64 = BootstrapSummary<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("count vector sums to zero")]
    EmptyCounts,
    #[error("modification tally has zero denominator")]
    EmptyTally,
    #[error("no observations to resample")]
    EmptyObservations,
    #[error("sample too small or without variance: {0}")]
    DegenerateSample(String),
    #[error("contingency table has an expected cell count of zero")]
    ZeroExpectedCell,
    #[error("rank vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, StatsError>;
