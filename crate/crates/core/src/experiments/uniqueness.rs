//! Statistical uniqueness probe: cross-initialization and cross-scheme
//! agreement. Per path, the Picard fixed point from two initializations and
//! the degenerate-system Euler solution are compared in sup norm; uniqueness
//! at desk scale means all three coincide up to discretization error.

use super::{ExperimentError, config_value};
use crate::drift::builtin_drift_by_name;
use crate::grid::TimeGrid;
use crate::hurst::validate_hurst;
use crate::noise::ExactFbmGenerator;
use crate::parallel::par_map;
use crate::report::{CsvTable, ExperimentReport};
use crate::rng::RngSeed;
use crate::solver::{
    PicardInit, SolverConfig, SolverError, choose_epsilon, euler_system_solve, picard_solve,
};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniquenessConfig {
    pub hurst: f64,
    pub alpha: f64,
    pub drift_name: String,
    pub k_level: f64,
    pub eps: Option<f64>,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self {
            hurst: 1.5,
            alpha: 0.8,
            drift_name: "abs_pow".into(),
            k_level: 5.0,
            eps: None,
            n_paths: 100,
            n_steps: 1024,
            seed: 0,
        }
    }
}

/// Per-path metric: max pairwise sup distance among `{φ₁+B^H, φ₂+B^H, X_euler}`.
/// A path passes when the metric clears `10·(tol + Δ^{min(1,α)}·scale)` with
/// `scale = 1 + ‖b‖`; the experiment passes when the median clears it.
pub fn uniqueness_probe(cfg: &UniquenessConfig) -> Result<ExperimentReport, ExperimentError> {
    let started = Instant::now();
    let h = validate_hurst(cfg.hurst)?;
    let drift = builtin_drift_by_name(&cfg.drift_name, cfg.alpha, 1)?;
    let eps = match cfg.eps {
        Some(e) => e,
        None => choose_epsilon(h, cfg.alpha).unwrap_or(0.5 * h.value().min(1.0)),
    };
    let solver_cfg = SolverConfig::for_drift(&drift, cfg.k_level, eps);
    let grid = TimeGrid::unit(cfg.n_steps);
    let generator = ExactFbmGenerator::new(h.base(), grid.clone(), 1, false)?;
    let master = RngSeed::new(cfg.seed, 0);

    let dt = grid.dt();
    let scale = 1.0 + drift.holder_bound;
    let threshold = 10.0 * (solver_cfg.tol + dt.powf(cfg.alpha.min(1.0)) * scale);

    let metrics: Vec<f64> = par_map(cfg.n_paths, |rep| {
        let path = generator
            .sample(master.derived("uniqueness", rep as u64))
            .lift(h)
            .expect("matching fraction");
        let solve = |init: PicardInit| match picard_solve(&path, &drift, &solver_cfg, init) {
            Ok(state) => state.phi,
            Err(SolverError::MaxItersExceeded(state)) => state.phi,
            Err(e) => panic!("picard solve failed structurally: {e}"),
        };
        let phi_zero = solve(PicardInit::Zero);
        let phi_linear = solve(PicardInit::LinearUnit);
        let euler = euler_system_solve(&path, &drift);

        let top = path.top();
        let n_pts = path.n_points();
        let x1: Vec<f64> = (0..n_pts).map(|i| phi_zero[i] + top[i]).collect();
        let x2: Vec<f64> = (0..n_pts).map(|i| phi_linear[i] + top[i]).collect();
        let sup = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        sup(&x1, &x2).max(sup(&x1, &euler.x)).max(sup(&x2, &euler.x))
    });

    let mut sorted = metrics.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let pass_fraction =
        metrics.iter().filter(|m| **m < threshold).count() as f64 / metrics.len() as f64;

    let mut report = ExperimentReport::new(
        format!("uniqueness-h{}", cfg.hurst),
        config_value(cfg),
        cfg.seed,
    );
    let mut table = CsvTable::new("path,metric,threshold,pass".to_string());
    for (i, m) in metrics.iter().enumerate() {
        table.push(format!("{i},{m},{threshold},{}", (*m < threshold) as u8));
    }
    report.set_metric("median_metric", median);
    report.set_metric("pass_fraction", pass_fraction);
    report.set_metric("threshold", threshold);
    report.set_metric("worst_metric", *sorted.last().unwrap());
    report.pass = median < threshold;
    report.table = Some(table);
    report.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}
