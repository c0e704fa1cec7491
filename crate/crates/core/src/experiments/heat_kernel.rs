//! Empirical probes of the two heat-kernel estimates for `P^H_t f`:
//! a gradient-type bound `t^{H(α−1)}|x−y|` and a second-difference bound
//! `t^{H(α−2)}|x₁−x₂||x₁−x₃| + t^{H(α−1)}|x₁−x₂−x₃+x₄|`. The probe measures
//! LHS/RHS ratios across time decades; consistency means the ratio stays
//! bounded as `t ↓ 0`, not that any particular constant is achieved.

use super::{ExperimentError, config_value};
use crate::drift::builtin_drift_by_name;
use crate::hurst::validate_hurst;
use crate::rate::loglog_fit;
use crate::report::{CsvTable, ExperimentReport};
use crate::rng::RngSeed;
use rand::RngExt;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatKernelConfig {
    pub hurst: f64,
    pub alpha: f64,
    pub n_trials: usize,
    pub nodes: usize,
    /// probe times `t = 2^{−k}`, `k = 0..t_decades`
    pub t_decades: usize,
    /// fitted growth slope of the max ratio vs `t` must stay above this
    pub growth_slope_floor: f64,
    pub seed: u64,
}

impl Default for HeatKernelConfig {
    fn default() -> Self {
        Self {
            hurst: 1.5,
            alpha: 0.8,
            n_trials: 1000,
            nodes: 48,
            t_decades: 8,
            growth_slope_floor: -0.1,
            seed: 0,
        }
    }
}

/// Sample points and report the worst LHS/RHS ratio for both displayed bounds
/// at each time decade; pass iff every ratio is finite and the fitted slope
/// of the max ratio against `t` shows no blow-up as `t ↓ 0`.
pub fn heat_kernel_probe(cfg: &HeatKernelConfig) -> Result<ExperimentReport, ExperimentError> {
    let started = Instant::now();
    let h = validate_hurst(cfg.hurst)?;
    let drift = builtin_drift_by_name("abs_pow", cfg.alpha, 1)?;
    // the certified bound covers sup and seminorm separately, so 2·bound
    // certifies ‖f‖_{C^α} = ‖f‖_∞ + [f]_α ≤ 1 after rescaling
    let norm_bound = 2.0 * drift.holder_bound;
    let f = move |x: &[f64]| drift.eval(x)[0] / norm_bound;
    let apply = |t: f64, x: f64| {
        super::semigroup::gaussian_semigroup_apply(&f, h, t, &[x], cfg.nodes)
    };

    let mut report =
        ExperimentReport::new(format!("heatkernel-h{}", cfg.hurst), config_value(cfg), cfg.seed);
    let mut table = CsvTable::new("t,max_ratio_gradient,max_ratio_second_diff".to_string());

    let hv = h.value();
    let e1 = hv * (cfg.alpha - 1.0);
    let e2 = hv * (cfg.alpha - 2.0);
    let mut rng = RngSeed::new(cfg.seed, 0).derived("heatkernel", 0).rng();
    let mut ts = Vec::new();
    let mut maxima = Vec::new();
    let mut all_finite = true;
    for k in 0..cfg.t_decades {
        let t = 2f64.powi(-(k as i32));
        let mut worst1 = 0.0_f64;
        let mut worst2 = 0.0_f64;
        for _ in 0..cfg.n_trials {
            let x: f64 = rng.random_range(-2.0..2.0);
            let y: f64 = x + rng.random_range(-1.0..1.0);
            if (x - y).abs() > 1e-12 {
                let lhs = (apply(t, x) - apply(t, y)).abs();
                let ratio = lhs / (t.powf(e1) * (x - y).abs());
                worst1 = worst1.max(ratio);
            }
            // structured quadruple x₁ = x+h₁+h₂, x₂ = x+h₁, x₃ = x+h₂, x₄ = x
            let h1: f64 = rng.random_range(-0.5..0.5);
            let h2: f64 = rng.random_range(-0.5..0.5);
            if h1.abs() > 1e-9 && h2.abs() > 1e-9 {
                let lhs = (apply(t, x + h1 + h2) - apply(t, x + h1) - apply(t, x + h2)
                    + apply(t, x))
                .abs();
                let ratio = lhs / (t.powf(e2) * h1.abs() * h2.abs());
                worst2 = worst2.max(ratio);
            }
        }
        if !worst1.is_finite() || !worst2.is_finite() {
            all_finite = false;
        }
        ts.push(t);
        maxima.push(worst1.max(worst2).max(1e-300));
        table.push(format!("{t},{worst1},{worst2}"));
        report.set_metric(format!("gradient_ratio_{k}"), worst1);
        report.set_metric(format!("second_diff_ratio_{k}"), worst2);
    }

    let fit = loglog_fit(&ts, &maxima)?;
    report.set_metric("max_ratio", maxima.iter().fold(0.0_f64, |a, b| a.max(*b)));
    report.set_metric("growth_slope", fit.slope);
    report.pass = all_finite && fit.slope >= cfg.growth_slope_floor;
    report.table = Some(table);
    report.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::semigroup::gaussian_semigroup_apply;

    #[test]
    fn linear_function_ratio_flat_in_time() {
        // for f linear with slope 1 and α = 1 both sides scale identically
        let h = validate_hurst(1.5).unwrap();
        let f = |x: &[f64]| x[0];
        for k in 0..6 {
            let t = 2f64.powi(-k);
            let lhs = (gaussian_semigroup_apply(&f, h, t, &[0.4], 32)
                - gaussian_semigroup_apply(&f, h, t, &[-0.3], 32))
            .abs();
            // e1 = H(α−1) = 0 here, so the bound is |x−y|
            assert!((lhs / 0.7 - 1.0).abs() < 1e-10, "constant ratio at t={t}");
        }
    }

    #[test]
    fn constant_function_lhs_zero() {
        let h = validate_hurst(0.7).unwrap();
        let f = |_: &[f64]| 2.0;
        let a = gaussian_semigroup_apply(&f, h, 0.5, &[1.0], 32);
        let b = gaussian_semigroup_apply(&f, h, 0.5, &[-1.0], 32);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn probe_passes_at_desk_scale() {
        let cfg = HeatKernelConfig {
            n_trials: 100,
            t_decades: 6,
            nodes: 32,
            seed: 4,
            ..Default::default()
        };
        let report = heat_kernel_probe(&cfg).unwrap();
        assert!(report.pass, "metrics: {:?}", report.metrics);
        assert!(report.metric("max_ratio").unwrap().is_finite());
    }
}
