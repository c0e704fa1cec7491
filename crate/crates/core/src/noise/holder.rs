//! Grid Hölder seminorms, running norms, and the stopping times `τ_K`.

use super::path::{MultiLevelPath, NoiseError};
use serde::{Deserialize, Serialize};

/// Which pairs enter the supremum. Exhaustive is exact on the grid; the
/// dyadic-lag set `{(i, i+2^k)}` scales to long paths. The default switches
/// at [`EXHAUSTIVE_LIMIT`] points and the choice is recorded in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairScheme {
    Exhaustive,
    DyadicLags,
}

/// Above this many grid points the default scheme degrades to dyadic lags.
pub const EXHAUSTIVE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormEstimate {
    pub value: f64,
    pub scheme: PairScheme,
    pub pairs_evaluated: usize,
}

/// Split `γ > 0` into `γ̂ ∈ ℕ` and `γ̄ ∈ (0,1]` with `γ = γ̂ + γ̄`.
pub fn holder_decompose(gamma: f64) -> (usize, f64) {
    assert!(gamma > 0.0 && gamma.is_finite(), "Hölder exponent must be positive");
    let hat = (gamma.ceil() - 1.0).max(0.0) as usize;
    (hat, gamma - hat as f64)
}

fn default_scheme(n_points: usize) -> PairScheme {
    if n_points <= EXHAUSTIVE_LIMIT { PairScheme::Exhaustive } else { PairScheme::DyadicLags }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `sup_{u<v} |g_u − g_v| / |u−v|^γ̄` over the selected pair set, where `g`
/// are the supplied derivative samples.
pub fn holder_seminorm_from_derivative(
    times: &[f64],
    deriv: &[f64],
    dim: usize,
    gamma_bar: f64,
    scheme: Option<PairScheme>,
) -> SeminormEstimate {
    let n = times.len();
    let scheme = scheme.unwrap_or_else(|| default_scheme(n));
    let mut sup = 0.0_f64;
    let mut pairs = 0usize;
    let mut consider = |i: usize, j: usize| {
        let d = norm_diff(&deriv[i * dim..(i + 1) * dim], &deriv[j * dim..(j + 1) * dim]);
        let r = d / (times[j] - times[i]).powf(gamma_bar);
        if r > sup {
            sup = r;
        }
        pairs += 1;
    };
    match scheme {
        PairScheme::Exhaustive => {
            for i in 0..n {
                for j in (i + 1)..n {
                    consider(i, j);
                }
            }
        }
        PairScheme::DyadicLags => {
            let mut lag = 1usize;
            while lag < n {
                for i in 0..(n - lag) {
                    consider(i, i + lag);
                }
                lag *= 2;
            }
        }
    }
    SeminormEstimate { value: sup, scheme, pairs_evaluated: pairs }
}

/// Where the `γ̂`-th derivative samples come from.
pub enum DerivativeSource<'a> {
    /// `∂^{γ̂}f` is a stored level of the path; `f` is the path's top level.
    ExactLevels(&'a MultiLevelPath),
    /// `γ̂`-fold central differences of raw samples (one-sided at the ends,
    /// which carries an O(Δ) bias).
    FiniteDifference { times: &'a [f64], values: &'a [f64], dim: usize },
}

/// The grid seminorm `[f]_{C^γ}` with `γ = γ̂ + γ̄`.
pub fn holder_seminorm(
    source: DerivativeSource,
    gamma: f64,
) -> Result<SeminormEstimate, NoiseError> {
    let (hat, bar) = holder_decompose(gamma);
    match source {
        DerivativeSource::ExactLevels(path) => {
            let deriv = path.derivative_level(hat)?;
            Ok(holder_seminorm_from_derivative(
                path.grid().points(),
                deriv,
                path.dim(),
                bar,
                None,
            ))
        }
        DerivativeSource::FiniteDifference { times, values, dim } => {
            if times.len() < hat + 2 {
                return Err(NoiseError::InsufficientGrid);
            }
            if values.len() != times.len() * dim {
                return Err(NoiseError::InvalidInput("values length must be n_points·dim"));
            }
            let mut deriv = values.to_vec();
            for _ in 0..hat {
                deriv = central_difference(times, &deriv, dim);
            }
            Ok(holder_seminorm_from_derivative(times, &deriv, dim, bar, None))
        }
    }
}

fn central_difference(times: &[f64], vals: &[f64], dim: usize) -> Vec<f64> {
    let n = times.len();
    let mut out = vec![0.0; vals.len()];
    for c in 0..dim {
        out[c] = (vals[dim + c] - vals[c]) / (times[1] - times[0]);
        out[(n - 1) * dim + c] =
            (vals[(n - 1) * dim + c] - vals[(n - 2) * dim + c]) / (times[n - 1] - times[n - 2]);
        for i in 1..n - 1 {
            out[i * dim + c] =
                (vals[(i + 1) * dim + c] - vals[(i - 1) * dim + c]) / (times[i + 1] - times[i - 1]);
        }
    }
    out
}

/// Incrementally maintained Hölder norm `‖f‖_{C^0} + [f]_{C^{γ̂+γ̄}}`:
/// pushing a point updates the sup norm with the new value and the seminorm
/// with pairs against earlier points per the chosen scheme.
#[derive(Debug, Clone)]
pub struct RunningHolderNorm {
    gamma_bar: f64,
    dim: usize,
    scheme: PairScheme,
    times: Vec<f64>,
    derivs: Vec<f64>,
    sup: f64,
    semi: f64,
}

impl RunningHolderNorm {
    pub fn new(gamma_bar: f64, dim: usize, scheme: PairScheme) -> Self {
        Self { gamma_bar, dim, scheme, times: Vec::new(), derivs: Vec::new(), sup: 0.0, semi: 0.0 }
    }

    /// Current value of `sup|f| + [∂^{γ̂}f]_{γ̄}` over the points seen so far.
    pub fn norm(&self) -> f64 {
        self.sup + self.semi
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Add the sample at time `t`; `value` feeds the sup norm, `deriv` the
    /// seminorm. Returns the updated norm.
    pub fn push(&mut self, t: f64, value: &[f64], deriv: &[f64]) -> f64 {
        debug_assert_eq!(value.len(), self.dim);
        debug_assert_eq!(deriv.len(), self.dim);
        let mag = value.iter().map(|v| v * v).sum::<f64>().sqrt();
        if mag > self.sup {
            self.sup = mag;
        }
        let k = self.times.len();
        let mut best = self.semi;
        let mut consider = |i: usize, this: &Self| {
            let d = norm_diff(&this.derivs[i * this.dim..(i + 1) * this.dim], deriv);
            let r = d / (t - this.times[i]).powf(this.gamma_bar);
            if r > best {
                best = r;
            }
        };
        match self.scheme {
            PairScheme::Exhaustive => {
                for i in 0..k {
                    consider(i, self);
                }
            }
            PairScheme::DyadicLags => {
                let mut lag = 1usize;
                while lag <= k {
                    consider(k - lag, self);
                    lag *= 2;
                }
            }
        }
        self.semi = best;
        self.times.push(t);
        self.derivs.extend_from_slice(deriv);
        self.norm()
    }
}

/// `τ_K = inf{t : ‖B^H‖_{C^{H−ε}[0,t]} > K} ∧ end`, evaluated on grid points
/// with exact-level derivatives. Returns `(index, time)`.
pub fn stopping_time_tau_k_with_scheme(
    path: &MultiLevelPath,
    k_level: f64,
    eps: f64,
    scheme: PairScheme,
) -> (usize, f64) {
    let h = path.hurst().value();
    assert!(eps > 0.0 && eps < h, "need 0 < ε < H");
    let (hat, bar) = holder_decompose(h - eps);
    let deriv = path.derivative_level(hat).expect("γ̂ ≤ ⌊H⌋ holds for γ = H−ε");
    let top = path.top();
    let dim = path.dim();
    let points = path.grid().points();
    let mut running = RunningHolderNorm::new(bar, dim, scheme);
    for (i, &t) in points.iter().enumerate() {
        let norm = running.push(t, &top[i * dim..(i + 1) * dim], &deriv[i * dim..(i + 1) * dim]);
        if norm > k_level {
            return (i, t);
        }
    }
    (points.len() - 1, path.grid().end())
}

/// [`stopping_time_tau_k_with_scheme`] with the default pair scheme.
pub fn stopping_time_tau_k(path: &MultiLevelPath, k_level: f64, eps: f64) -> f64 {
    let scheme = default_scheme(path.n_points());
    stopping_time_tau_k_with_scheme(path, k_level, eps, scheme).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::hurst::validate_hurst;
    use crate::noise::gen_base_fbm_exact;
    use crate::rng::RngSeed;

    fn raw(values: impl Fn(f64) -> f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let grid = TimeGrid::unit(n);
        let ts = grid.points().to_vec();
        let vs = ts.iter().map(|&t| values(t)).collect();
        (ts, vs)
    }

    #[test]
    fn linear_function_gamma_one() {
        let (ts, vs) = raw(|t| t, 64);
        let est = holder_seminorm(
            DerivativeSource::FiniteDifference { times: &ts, values: &vs, dim: 1 },
            1.0,
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-12, "γ̂=0, γ̄=1: slope 1");
    }

    #[test]
    fn constant_function_vanishes() {
        let (ts, vs) = raw(|_| 3.5, 32);
        for gamma in [0.3, 1.0, 1.7] {
            let est = holder_seminorm(
                DerivativeSource::FiniteDifference { times: &ts, values: &vs, dim: 1 },
                gamma,
            )
            .unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn quadratic_gamma_three_halves() {
        // f(t) = t² on [0,1]: ∂f = 2t, sup 2|u−v|/|u−v|^{1/2} = 2 at |u−v| = 1
        let n = 512;
        let (ts, vs) = raw(|t| t * t, n);
        let est = holder_seminorm(
            DerivativeSource::FiniteDifference { times: &ts, values: &vs, dim: 1 },
            1.5,
        )
        .unwrap();
        assert!((est.value - 2.0).abs() < 0.01, "finite differences: {}", est.value);

        // exact-levels route: base 2t lifted once has top t² exactly
        let grid = TimeGrid::unit(n);
        let base: Vec<f64> = grid.points().iter().map(|&t| 2.0 * t).collect();
        let path = crate::noise::MultiLevelPath::from_base(
            validate_hurst(0.5).unwrap(),
            grid,
            1,
            base,
            None,
        )
        .unwrap()
        .lift(validate_hurst(1.5).unwrap())
        .unwrap();
        let est = holder_seminorm(DerivativeSource::ExactLevels(&path), 1.5).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12, "exact levels: {}", est.value);
    }

    #[test]
    fn decompose_edges() {
        assert_eq!(holder_decompose(1.0), (0, 1.0));
        assert_eq!(holder_decompose(2.0), (1, 1.0));
        let (hat, bar) = holder_decompose(1.25);
        assert_eq!(hat, 1);
        assert!((bar - 0.25).abs() < 1e-15);
    }

    #[test]
    fn insufficient_grid_rejected() {
        let ts = [0.0, 1.0];
        let vs = [0.0, 1.0];
        let err = holder_seminorm(
            DerivativeSource::FiniteDifference { times: &ts, values: &vs, dim: 1 },
            1.5,
        )
        .unwrap_err();
        assert_eq!(err, NoiseError::InsufficientGrid);
    }

    #[test]
    fn running_norm_matches_batch() {
        let h = validate_hurst(0.7).unwrap();
        let path = gen_base_fbm_exact(h, TimeGrid::unit(128), 1, RngSeed::new(5, 0), false).unwrap();
        let est = holder_seminorm(DerivativeSource::ExactLevels(&path), 0.6).unwrap();
        let mut running = RunningHolderNorm::new(0.6, 1, PairScheme::Exhaustive);
        let mut last = 0.0;
        for (i, &t) in path.grid().points().iter().enumerate() {
            last = running.push(t, &path.top()[i..i + 1], &path.top()[i..i + 1]);
        }
        let sup = path.top().iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!((last - (est.value + sup)).abs() < 1e-12);
    }

    #[test]
    fn tau_monotone_in_k_and_caps_at_end() {
        let h = validate_hurst(1.5).unwrap();
        let path = gen_base_fbm_exact(h.base(), TimeGrid::unit(256), 1, RngSeed::new(8, 2), false)
            .unwrap()
            .lift(h)
            .unwrap();
        let huge = stopping_time_tau_k(&path, 1e18, 0.25);
        assert_eq!(huge, 1.0, "τ capped at the end of the grid");
        let mut prev = 0.0;
        for k in [0.0, 0.05, 0.1, 0.5, 1.0, 3.0] {
            let tau = stopping_time_tau_k(&path, k, 0.25);
            assert!(tau >= prev, "τ_K nondecreasing in K");
            prev = tau;
        }
    }

    #[test]
    fn tau_zero_level_stops_at_first_point_after_start() {
        let grid = TimeGrid::unit(16);
        let base: Vec<f64> = grid.points().iter().map(|&t| 1.0 + t).collect();
        let path = crate::noise::MultiLevelPath::from_base(
            validate_hurst(0.5).unwrap(),
            grid.clone(),
            1,
            base,
            None,
        )
        .unwrap();
        let tau = stopping_time_tau_k(&path, 0.0, 0.25);
        assert_eq!(tau, grid.points()[0], "norm positive at the very first sample");
    }
}
