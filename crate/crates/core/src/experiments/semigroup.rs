//! The reparametrised heat semigroup `P^H_t = P_{c(H)t^{2H}}` and the
//! conditioning identity `E^s f(B^H_t) = P^H_{t−s} f(E^s B^H_t)`.

use super::{ExperimentError, config_value, mean_and_se};
use crate::drift::builtin_drift_by_name;
use crate::hurst::{Hurst, c_of_h, validate_hurst};
use crate::noise::{conditional_remainder_exact, gen_mvn_fbm};
use crate::parallel::par_map;
use crate::quad::gauss_hermite;
use crate::report::{CsvTable, ExperimentReport};
use crate::rng::RngSeed;
use crate::grid::TimeGrid;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// `P^H_t f(x)`: Gauss–Hermite tensor quadrature of the Gaussian convolution
/// with variance `c(H)·t^{2H}` per axis.
pub fn gaussian_semigroup_apply(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    h: Hurst,
    t: f64,
    x: &[f64],
    quadrature_nodes: usize,
) -> f64 {
    assert!(quadrature_nodes >= 16, "need at least 16 nodes");
    assert!(t > 0.0, "semigroup time must be positive");
    let d = x.len();
    assert!((1..=3).contains(&d), "tensor quadrature supports d ≤ 3");
    let sigma = (c_of_h(h) * t.powf(2.0 * h.value())).sqrt();
    let (nodes, weights) = gauss_hermite(quadrature_nodes);
    // ∫ f(x + √2 σ u) e^{−u²}/√π du per axis
    let scale = std::f64::consts::SQRT_2 * sigma;
    let norm = std::f64::consts::PI.sqrt().powi(d as i32);
    let mut point = vec![0.0; d];
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let mut w = 1.0;
        for axis in 0..d {
            w *= weights[idx[axis]];
            point[axis] = x[axis] + scale * nodes[idx[axis]];
        }
        acc += w * f(&point);
        // advance the tensor index
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < quadrature_nodes {
                break;
            }
            idx[axis] = 0;
            axis += 1;
            if axis == d {
                return acc / norm;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemigroupConfig {
    pub hurst: f64,
    /// Hölder exponent of the builtin test function
    pub alpha: f64,
    /// builtin drift whose first component supplies `f`
    pub drift_name: String,
    pub spacings: Vec<f64>,
    /// conditioning time
    pub s: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub nodes: usize,
    pub n_steps: usize,
    pub past_truncation: f64,
    pub se_multiple: f64,
    pub seed: u64,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        Self {
            hurst: 1.5,
            alpha: 0.8,
            drift_name: "abs_pow".into(),
            spacings: vec![0.1, 0.25],
            s: 0.5,
            n_outer: 50,
            n_inner: 64,
            nodes: 64,
            n_steps: 1024,
            past_truncation: 50.0,
            se_multiple: 3.0,
            seed: 0,
        }
    }
}

/// Left side by nested Monte Carlo over conditional remainders, right side by
/// Gauss–Hermite at the simulated `E^s B^H_t`; the averaged residual must sit
/// within `se_multiple` standard errors.
pub fn semigroup_identity_experiment(
    cfg: &SemigroupConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let started = Instant::now();
    let h = validate_hurst(cfg.hurst)?;
    if cfg.n_inner < 2 || !cfg.n_inner.is_multiple_of(2) {
        return Err(ExperimentError::BadConfig("n_inner must be even and ≥ 2".into()));
    }
    if !(cfg.s > 0.0 && cfg.s < 1.0) {
        return Err(ExperimentError::BadConfig("s must lie in (0,1)".into()));
    }
    let drift = builtin_drift_by_name(&cfg.drift_name, cfg.alpha, 1)?;
    let f = move |x: &[f64]| drift.eval(x)[0];
    let master = RngSeed::new(cfg.seed, 0);
    let grid = TimeGrid::unit(cfg.n_steps);
    let dt = grid.dt();

    // snap the conditioning time and the spacings to whole cells
    let s_idx = (cfg.s * cfg.n_steps as f64).round() as usize;
    let s = grid.points()[s_idx];
    let offsets: Vec<usize> = cfg
        .spacings
        .iter()
        .map(|d| ((d * cfg.n_steps as f64).round() as usize).max(1))
        .collect();
    if s_idx + offsets.iter().max().unwrap() > cfg.n_steps {
        return Err(ExperimentError::BadConfig("s + max spacing exceeds the grid".into()));
    }

    let mut report = ExperimentReport::new(
        format!("semigroup-h{}", cfg.hurst),
        config_value(cfg),
        cfg.seed,
    );
    let mut table = CsvTable::new("spacing,mean_residual,se,z".to_string());
    let mut pass = true;

    for (li, &m) in offsets.iter().enumerate() {
        let span = m as f64 * dt;
        let residuals: Vec<f64> = par_map(cfg.n_outer, |rep| {
            let seed = master.derived("semigroup-outer", (li * cfg.n_outer + rep) as u64);
            let sim = gen_mvn_fbm(h, grid.clone(), 1, cfg.past_truncation, seed)
                .expect("valid MvN config");
            let cm = sim.conditional_mean(s).expect("s on grid");
            let x_star = cm.top_at(m).to_vec();

            // inner antithetic sampling of the remainder
            let mut acc = 0.0;
            let inner_master = seed.derived("semigroup-inner", 0);
            let mut z = vec![0.0; m];
            for j in 0..cfg.n_inner / 2 {
                inner_master.derived("pair", j as u64).fill_standard_normal(&mut z);
                let sqrt_dt = dt.sqrt();
                let w: Vec<f64> = z.iter().map(|v| v * sqrt_dt).collect();
                let r = conditional_remainder_exact(dt, &w, 1, h)[0];
                acc += f(&[x_star[0] + r]) + f(&[x_star[0] - r]);
            }
            let lhs = acc / cfg.n_inner as f64;
            let rhs = gaussian_semigroup_apply(&f, h, span, &x_star, cfg.nodes);
            lhs - rhs
        });
        let (mean, se) = mean_and_se(&residuals);
        let z_score = if se > 0.0 { mean / se } else { 0.0 };
        if z_score.abs() > cfg.se_multiple {
            pass = false;
        }
        table.push(format!("{span},{mean},{se},{z_score}"));
        report.set_metric(format!("residual_{li}"), mean);
        report.set_metric(format!("se_{li}"), se);
        report.set_metric(format!("z_{li}"), z_score);
    }

    report.pass = pass;
    report.table = Some(table);
    report.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}
