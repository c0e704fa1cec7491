//! The stopped Picard map `𝒯_K` and its fixed-point iteration.
//!
//! `(𝒯_K φ)_t = ∫₀ᵗ b(φ_{r∧τ_K} + B^H_r) dr`: only the drift argument is
//! frozen at `τ_K`; the noise keeps running. Quadrature is trapezoid on the
//! grid (`τ_K` lands on a grid point, so no cell straddles it).

use super::{SolverConfig, SolverError};
use crate::drift::DriftSpec;
use crate::noise::{
    MultiLevelPath, PairScheme, holder_seminorm_from_derivative, stopping_time_tau_k_with_scheme,
};
use serde::Serialize;

/// Distances between successive iterates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterDistance {
    pub sup: f64,
    /// grid ½-Hölder seminorm of the difference (dyadic-lag pair set)
    pub half_holder: f64,
}

/// One Picard iterate: the drift part `φ` sampled on the path grid.
#[derive(Debug, Clone, Serialize)]
pub struct PicardState {
    pub dim: usize,
    /// flat point-major samples, `φ_0 = 0`
    pub phi: Vec<f64>,
    pub iteration_index: usize,
    pub distance_history: Vec<IterDistance>,
}

impl PicardState {
    pub fn value(&self, i: usize) -> &[f64] {
        &self.phi[i * self.dim..(i + 1) * self.dim]
    }

    /// Mean ratio of successive sup distances over the last `window`
    /// recorded steps (skipping sub-round-off distances).
    pub fn geometric_ratio(&self, window: usize) -> Option<f64> {
        let sups: Vec<f64> = self.distance_history.iter().map(|d| d.sup).collect();
        ratio_over_window(&sups, window)
    }

    /// Same, in the ½-seminorm.
    pub fn half_holder_ratio(&self, window: usize) -> Option<f64> {
        let vals: Vec<f64> = self.distance_history.iter().map(|d| d.half_holder).collect();
        ratio_over_window(&vals, window)
    }
}

fn ratio_over_window(dists: &[f64], window: usize) -> Option<f64> {
    let floor = 1e-13;
    let mut ratios = Vec::new();
    for w in dists.windows(2).rev() {
        if ratios.len() >= window {
            break;
        }
        if w[0] > floor && w[1] > floor {
            ratios.push(w[1] / w[0]);
        }
    }
    if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    }
}

/// Initialization: the two canonical members of `𝒮⁰` plus custom data.
#[derive(Debug, Clone)]
pub enum PicardInit {
    Zero,
    /// `φ_t = t·(1,…,1)`
    LinearUnit,
    /// caller-supplied Lipschitz samples (flat point-major)
    Custom(Vec<f64>),
}

fn initial_state(path: &MultiLevelPath, init: &PicardInit) -> PicardState {
    let n_pts = path.n_points();
    let d = path.dim();
    let phi = match init {
        PicardInit::Zero => vec![0.0; n_pts * d],
        PicardInit::LinearUnit => {
            let mut phi = vec![0.0; n_pts * d];
            for (i, &t) in path.grid().points().iter().enumerate() {
                for c in 0..d {
                    phi[i * d + c] = t;
                }
            }
            phi
        }
        PicardInit::Custom(values) => {
            assert_eq!(values.len(), n_pts * d, "custom init must match the grid");
            values.clone()
        }
    };
    PicardState { dim: d, phi, iteration_index: 0, distance_history: Vec::new() }
}

fn tau_index(path: &MultiLevelPath, cfg: &SolverConfig) -> usize {
    let scheme = cfg.pair_scheme.unwrap_or({
        if path.n_points() <= 2000 { PairScheme::Exhaustive } else { PairScheme::DyadicLags }
    });
    stopping_time_tau_k_with_scheme(path, cfg.k_level, cfg.eps, scheme).0
}

fn apply_map(
    phi: &PicardState,
    path: &MultiLevelPath,
    drift: &DriftSpec,
    tau_idx: usize,
) -> PicardState {
    let d = phi.dim;
    let n_pts = path.n_points();
    let dt = path.grid().dt();
    let top = path.top();
    let mut integrand = vec![0.0; n_pts * d];
    let mut arg = vec![0.0; d];
    let mut out = vec![0.0; d];
    for i in 0..n_pts {
        let frozen = i.min(tau_idx);
        for c in 0..d {
            arg[c] = phi.phi[frozen * d + c] + top[i * d + c];
        }
        drift.eval_into(&arg, &mut out);
        integrand[i * d..(i + 1) * d].copy_from_slice(&out);
    }
    let mut new_phi = vec![0.0; n_pts * d];
    for i in 1..n_pts {
        for c in 0..d {
            new_phi[i * d + c] = new_phi[(i - 1) * d + c]
                + 0.5 * dt * (integrand[(i - 1) * d + c] + integrand[i * d + c]);
        }
    }

    let sup = (0..n_pts)
        .map(|i| {
            (0..d)
                .map(|c| (new_phi[i * d + c] - phi.phi[i * d + c]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let diff: Vec<f64> = new_phi.iter().zip(&phi.phi).map(|(a, b)| a - b).collect();
    let half_holder = holder_seminorm_from_derivative(
        path.grid().points(),
        &diff,
        d,
        0.5,
        Some(PairScheme::DyadicLags),
    )
    .value;

    let mut history = phi.distance_history.clone();
    history.push(IterDistance { sup, half_holder });
    PicardState {
        dim: d,
        phi: new_phi,
        iteration_index: phi.iteration_index + 1,
        distance_history: history,
    }
}

/// One application of `𝒯_K`; appends the distance to the predecessor.
pub fn picard_step(
    phi: &PicardState,
    path: &MultiLevelPath,
    drift: &DriftSpec,
    cfg: &SolverConfig,
) -> PicardState {
    apply_map(phi, path, drift, tau_index(path, cfg))
}

/// Iterate `𝒯_K` until the sup distance drops below `cfg.tol`.
pub fn picard_solve(
    path: &MultiLevelPath,
    drift: &DriftSpec,
    cfg: &SolverConfig,
    init: PicardInit,
) -> Result<PicardState, SolverError> {
    let tau_idx = tau_index(path, cfg);
    let mut state = initial_state(path, &init);
    for _ in 0..cfg.max_iters {
        state = apply_map(&state, path, drift, tau_idx);
        if state.distance_history.last().unwrap().sup < cfg.tol {
            return Ok(state);
        }
    }
    Err(SolverError::MaxItersExceeded(Box::new(state)))
}
