//! The local-nondeterminism variance identity
//! `E|B^H_t − E^s B^H_t|² = d·c(H)|t−s|^{2H}`, measured per spacing and as a
//! log–log slope.

use super::{ExperimentError, config_value, mean_and_se};
use crate::hurst::{c_of_h, validate_hurst};
use crate::noise::conditional_remainder_exact;
use crate::parallel::par_map;
use crate::rate::loglog_fit;
use crate::report::{CsvTable, ExperimentReport};
use crate::rng::RngSeed;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceConfig {
    pub hurst: f64,
    pub dim: usize,
    pub spacings: Vec<f64>,
    pub n_samples: usize,
    /// quadrature cells per spacing for the remainder integral
    pub cells: usize,
    /// tolerance on the fitted slope against 2H
    pub slope_tol: f64,
    /// per-spacing tolerance in standard errors
    pub se_multiple: f64,
    pub seed: u64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            hurst: 1.5,
            dim: 1,
            spacings: vec![0.004, 0.008, 0.016, 0.032, 0.0625, 0.125, 0.25, 0.5],
            n_samples: 10_000,
            cells: 256,
            slope_tol: 0.05,
            se_multiple: 3.0,
            seed: 0,
        }
    }
}

/// Monte Carlo variance of the conditional remainder against the closed form,
/// per spacing, plus the slope of `log Var` vs `log(t−s)` (target `2H`).
pub fn variance_identity_experiment(
    cfg: &VarianceConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let started = Instant::now();
    let h = validate_hurst(cfg.hurst)?;
    if cfg.spacings.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(ExperimentError::BadConfig("spacings must lie in (0,1]".into()));
    }
    if cfg.spacings.len() < 3 || cfg.n_samples < 16 || cfg.cells < 4 || cfg.dim == 0 {
        return Err(ExperimentError::BadConfig(
            "need ≥3 spacings, ≥16 samples, ≥4 cells, dim ≥ 1".into(),
        ));
    }
    let master = RngSeed::new(cfg.seed, 0);
    let mut report =
        ExperimentReport::new(format!("variance-h{}", cfg.hurst), config_value(cfg), cfg.seed);
    let mut table = CsvTable::new("spacing,mc_variance,target,se,z".to_string());

    let mut pass = true;
    let mut vars = Vec::with_capacity(cfg.spacings.len());
    for (si, &span) in cfg.spacings.iter().enumerate() {
        let m = cfg.cells;
        let dt = span / m as f64;
        let sq_norms: Vec<f64> = par_map(cfg.n_samples, |rep| {
            let seed = master.derived("variance", (si * cfg.n_samples + rep) as u64);
            let mut z = vec![0.0; m * cfg.dim];
            seed.fill_standard_normal(&mut z);
            let sqrt_dt = dt.sqrt();
            for v in z.iter_mut() {
                *v *= sqrt_dt;
            }
            let r = conditional_remainder_exact(dt, &z, cfg.dim, h);
            r.iter().map(|x| x * x).sum::<f64>()
        });
        let (mean, se) = mean_and_se(&sq_norms);
        let target = cfg.dim as f64 * c_of_h(h) * span.powf(2.0 * h.value());
        let z_score = (mean - target) / se;
        if z_score.abs() > cfg.se_multiple {
            pass = false;
        }
        vars.push(mean);
        table.push(format!("{span},{mean},{target},{se},{z_score}"));
        report.set_metric(format!("var_{si}"), mean);
        report.set_metric(format!("z_{si}"), z_score);
    }

    let fit = loglog_fit(&cfg.spacings, &vars)?;
    let slope_err = (fit.slope - 2.0 * h.value()).abs();
    if slope_err > cfg.slope_tol {
        pass = false;
    }
    report.set_metric("slope", fit.slope);
    report.set_metric("slope_target", 2.0 * h.value());
    report.set_metric("slope_stderr", fit.stderr);
    report.set_metric("max_abs_z", {
        let zs: Vec<f64> = (0..cfg.spacings.len())
            .map(|i| report.metric(&format!("z_{i}")).unwrap().abs())
            .collect();
        zs.iter().fold(0.0_f64, |a, b| a.max(*b))
    });
    report.pass = pass;
    report.table = Some(table);
    report.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_case_exact_structure() {
        let cfg = VarianceConfig {
            hurst: 0.5,
            n_samples: 4000,
            spacings: vec![0.0625, 0.125, 0.25, 0.5],
            cells: 64,
            seed: 5,
            ..Default::default()
        };
        let report = variance_identity_experiment(&cfg).unwrap();
        assert!(report.pass, "H=1/2: variance = t−s, slope 1: {:?}", report.metrics);
        assert!((report.metric("slope").unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn h15_spacing_half_matches_closed_form() {
        let cfg = VarianceConfig {
            hurst: 1.5,
            n_samples: 10_000,
            spacings: vec![0.125, 0.25, 0.5],
            cells: 128,
            seed: 6,
            ..Default::default()
        };
        let report = variance_identity_experiment(&cfg).unwrap();
        assert!(report.pass, "{:?}", report.metrics);
        // spacing 0.5 sits at index 2: mean ≈ c(1.5)·0.5³ = 0.0416667
        let v = report.metric("var_2").unwrap();
        assert!((v - 0.0416667).abs() < 0.003, "var {v}");
    }

    #[test]
    fn slope_insensitive_to_dimension() {
        for dim in [1usize, 3] {
            let cfg = VarianceConfig {
                hurst: 0.7,
                dim,
                n_samples: 3000,
                spacings: vec![0.03125, 0.0625, 0.125, 0.25, 0.5],
                cells: 64,
                seed: 7,
                ..Default::default()
            };
            let report = variance_identity_experiment(&cfg).unwrap();
            assert!((report.metric("slope").unwrap() - 1.4).abs() < 0.05, "dim {dim}");
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = VarianceConfig { spacings: vec![0.5, 2.0, 0.25], ..Default::default() };
        assert!(matches!(
            variance_identity_experiment(&cfg),
            Err(ExperimentError::BadConfig(_))
        ));
    }
}
