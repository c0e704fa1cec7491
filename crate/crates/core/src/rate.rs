//! Log–log regression: the estimator behind every exponent check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FitError {
    #[error("log-log fit needs ≥ 3 equal-length, strictly positive samples")]
    DegenerateInput,
}

/// Result of an ordinary least squares fit of `log y` against `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub r_squared: f64,
}

/// Least squares on `(log x, log y)` with the standard error of the slope.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<RateEstimate, FitError> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(FitError::DegenerateInput);
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(FitError::DegenerateInput);
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-24 {
        return Err(FitError::DegenerateInput);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot < 1e-30 {
        if ss_res < 1e-30 { 1.0 } else { 0.0 }
    } else {
        1.0 - ss_res / ss_tot
    };
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(RateEstimate { slope, intercept, stderr, n_points: xs.len(), r_squared })
}
