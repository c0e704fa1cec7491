//! The stopped Picard fixed-point map, the degenerate-system Euler scheme,
//! the regularity-condition predicates, and the conditional Taylor operators.

mod euler;
mod expansion;
mod picard;

pub use euler::{SolutionPath, euler_system_solve, path_oscillation};
pub use expansion::{ExpansionOperator, expansion_apply, noise_taylor};
pub use picard::{IterDistance, PicardInit, PicardState, picard_solve, picard_step};

use crate::drift::DriftSpec;
use crate::hurst::Hurst;
use crate::noise::PairScheme;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("regularity condition violated for the requested (H, α)")]
    ConditionViolated,
    #[error("gamma recursion exceeded 10^4 steps; weak condition violated numerically")]
    NonTerminating,
    #[error("expansion order exceeds the supplied ψ-chain depth")]
    ChainTooShallow,
    #[error("time is not a grid point")]
    OffGrid,
    #[error("Picard iteration hit max_iters before reaching tolerance")]
    MaxItersExceeded(Box<PicardState>),
}

/// The strong regularity condition `α > 1 − 1/(2H)`.
pub fn strong_condition(h: Hurst, alpha: f64) -> bool {
    alpha > 1.0 - 1.0 / (2.0 * h.value())
}

/// The same condition in its rewritten form `1 + Hα − H > 1/2`; kept as an
/// independent evaluation route so the equivalence can be checked.
pub fn strong_condition_rewritten(h: Hurst, alpha: f64) -> bool {
    1.0 + h.value() * alpha - h.value() > 0.5
}

/// The weak condition `α > 1 − 1/H` (drift more regular than noise, in a
/// stochastic sense, for high-order iterates).
pub fn weak_condition(h: Hurst, alpha: f64) -> bool {
    alpha > 1.0 - 1.0 / h.value()
}

///`H > 1 + 1/√2`: with α at the strong threshold, the noise is already
/// smoother than the drift component of the solution.
pub fn noise_smoother_regime(h: Hurst) -> bool {
    h.value() > 1.0 + 1.0 / std::f64::consts::SQRT_2
}

/// Half the supremum of admissible ε in `2(1 + Hα − H) − εα > 1`, capped at
/// `H/2`. Requires the strong condition.
pub fn choose_epsilon(h: Hurst, alpha: f64) -> Result<f64, SolverError> {
    if !strong_condition(h, alpha) {
        return Err(SolverError::ConditionViolated);
    }
    let sup = (2.0 * (1.0 + h.value() * alpha - h.value()) - 1.0) / alpha;
    Ok((0.5 * sup).min(0.5 * h.value()))
}

/// Trace of the order recursion `γ₀ = 1`, `γ_k = 1 + α(γ_{k−1} ∧ (H−ε))`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaTrace {
    /// `γ_0 … γ_{k₀−1}`; the last entry is the first to exceed `H − ε`
    pub gammas: Vec<f64>,
    /// `inf{ℓ : γ_ℓ > H−ε} + 1`
    pub k0: usize,
    /// `γ_{k₀} = 1 + α(H−ε)`
    pub gamma_k0: f64,
}

/// Run the recursion until it clears `H − ε`. `α` must lie in `(0,1)`; a
/// violated weak condition shows up as non-termination and is reported as
/// such after 10⁴ steps.
pub fn gamma_recursion(alpha: f64, h: Hurst, eps: f64) -> Result<GammaTrace, SolverError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SolverError::ConditionViolated);
    }
    assert!(eps > 0.0 && eps < h.value(), "need 0 < ε < H");
    let target = h.value() - eps;
    let mut gammas = vec![1.0_f64];
    loop {
        let last = *gammas.last().unwrap();
        if last > target {
            let k0 = gammas.len();
            return Ok(GammaTrace { gammas, k0, gamma_k0: 1.0 + alpha * target });
        }
        if gammas.len() > 10_000 {
            return Err(SolverError::NonTerminating);
        }
        gammas.push(1.0 + alpha * last.min(target));
    }
}

/// Parameters of the stopped Picard solver.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// stopping level `K` of `τ_K`
    pub k_level: f64,
    /// Hölder slack `ε` in the norm `‖B^H‖_{C^{H−ε}}`
    pub eps: f64,
    /// sup-norm fixed-point tolerance
    pub tol: f64,
    pub max_iters: usize,
    /// even moment order used by replicate-level statistics
    pub p_moment: u32,
    /// pair scheme for the running Hölder norm; `None` picks by grid size
    pub pair_scheme: Option<PairScheme>,
}

impl SolverConfig {
    pub fn new(k_level: f64, eps: f64) -> Self {
        assert!(k_level > 0.0 && eps > 0.0);
        Self { k_level, eps, tol: 1e-8, max_iters: 60, p_moment: 2, pair_scheme: None }
    }

    /// Default tolerance scaled by the drift bound: `1e−8·(1 + ‖b‖)`.
    pub fn for_drift(drift: &DriftSpec, k_level: f64, eps: f64) -> Self {
        let mut cfg = Self::new(k_level, eps);
        cfg.tol = 1e-8 * (1.0 + drift.holder_bound);
        cfg
    }

    pub fn with_scheme(mut self, scheme: PairScheme) -> Self {
        self.pair_scheme = Some(scheme);
        self
    }
}
