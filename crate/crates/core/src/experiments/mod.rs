//! Monte Carlo harnesses that turn the quantitative statements into measured
//! slopes, ratios, and identity residuals. Every experiment is a pure
//! function of `(config, seed)`; replicates run on derived streams and
//! aggregation is order-fixed, so results do not depend on the worker count.

mod contraction;
mod expansion_rate;
mod heat_kernel;
mod semigroup;
mod threshold;
mod uniqueness;
mod variance;

pub use contraction::{ContractionConfig, contraction_rate_experiment};
pub use expansion_rate::{ExpansionPredictor, ExpansionRateConfig, expansion_rate_experiment};
pub use heat_kernel::{HeatKernelConfig, heat_kernel_probe};
pub use semigroup::{SemigroupConfig, gaussian_semigroup_apply, semigroup_identity_experiment};
pub use threshold::{ThresholdScanConfig, threshold_scan};
pub use uniqueness::{UniquenessConfig, uniqueness_probe};
pub use variance::{VarianceConfig, variance_identity_experiment};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Hurst(#[from] crate::hurst::HurstError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Noise(#[from] crate::noise::NoiseError),
    #[error(transparent)]
    Drift(#[from] crate::drift::DriftError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Fit(#[from] crate::rate::FitError),
    #[error("invalid experiment config: {0}")]
    BadConfig(String),
}

pub(crate) fn config_value<T: serde::Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Sample mean and the standard error of that mean.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = crate::quad::pairwise_mean(values);
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}
