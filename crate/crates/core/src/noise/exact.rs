//! Exact-covariance sampling of the base process on a uniform grid.
//!
//! The increments of fractional Brownian motion are stationary, so the path
//! is built as the cumulative sum of a fractional Gaussian noise vector drawn
//! through a dense Cholesky factor of the increment covariance. The factor is
//! computed once per generator and shared across replicates.

use super::path::{MultiLevelPath, NoiseError};
use crate::grid::TimeGrid;
use crate::hurst::Hurst;
use crate::quad::tanh_sinh;
use crate::rng::RngSeed;

/// Largest grid the dense factorization accepts.
pub const MAX_EXACT_GRID: usize = 4096;

/// Variance at `t = 1` of the raw Mandelbrot–van Ness process,
/// `∫_{-∞}^0 ((1−s)^{H−1/2} − (−s)^{H−1/2}) dW_s + ∫_0^1 (1−s)^{H−1/2} dW_s`,
/// computed by tanh–sinh quadrature of the squared kernel. The forward part
/// integrates in closed form to `1/(2H)`; the past part is split at `u = 1`
/// with the tail mapped by `u ↦ 1/v`.
pub fn mvn_variance_constant(h_bar: f64) -> f64 {
    assert!(h_bar > 0.0 && h_bar < 1.0, "base Hurst parameter must lie in (0,1)");
    let g = h_bar - 0.5;
    // ((1+u)^g − u^g)², written to avoid cancellation for large u
    let kernel_sq = move |u: f64| -> f64 {
        let d = if u < 2.0 {
            (1.0 + u).powf(g) - u.powf(g)
        } else {
            u.powf(g) * (g * (1.0 / u).ln_1p()).exp_m1()
        };
        d * d
    };
    let near = tanh_sinh(|_, da, _| kernel_sq(da), 0.0, 1.0, 1e-12);
    let tail = tanh_sinh(
        |_, da, _| {
            let v = da;
            kernel_sq(1.0 / v) / (v * v)
        },
        0.0,
        1.0,
        1e-12,
    );
    1.0 / (2.0 * h_bar) + near + tail
}

/// Exact-covariance generator for the base process `B^{H̄}`, `H̄ ∈ (0,1)`.
///
/// Per component, `Cov(B_s, B_t) = σ²·½(|s|^{2H} + |t|^{2H} − |t−s|^{2H})`
/// with times relative to the grid start; `σ² = 1` unless `mvn_scale` is set,
/// in which case `σ²` matches the raw Mandelbrot–van Ness normalization.
pub struct ExactFbmGenerator {
    hurst: Hurst,
    grid: TimeGrid,
    dim: usize,
    sigma2: f64,
    chol: Vec<f64>,
}

impl ExactFbmGenerator {
    pub fn new(
        hurst: Hurst,
        grid: TimeGrid,
        dim: usize,
        mvn_scale: bool,
    ) -> Result<Self, NoiseError> {
        if !hurst.is_base() {
            return Err(NoiseError::HurstMismatch);
        }
        if dim == 0 {
            return Err(NoiseError::InvalidInput("dimension must be positive"));
        }
        let n = grid.n_steps();
        if n > MAX_EXACT_GRID {
            return Err(NoiseError::GridTooLarge(format!(
                "dense factorization capped at {MAX_EXACT_GRID} steps, got {n}"
            )));
        }
        let sigma2 = if mvn_scale { mvn_variance_constant(hurst.value()) } else { 1.0 };
        let two_h = 2.0 * hurst.value();
        let scale = sigma2 * grid.dt().powf(two_h);
        // stationary fGn autocovariance γ(k)
        let gamma: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    scale
                } else {
                    let k = k as f64;
                    0.5 * scale * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
                }
            })
            .collect();
        let chol = cholesky_toeplitz(&gamma, n)?;
        Ok(Self { hurst, grid, dim, sigma2, chol })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Draw one path; the result carries only the base level.
    pub fn sample(&self, seed: RngSeed) -> MultiLevelPath {
        let n = self.grid.n_steps();
        let d = self.dim;
        let mut rng = seed.rng();
        let mut base = vec![0.0; (n + 1) * d];
        let mut z = vec![0.0; n];
        let mut fgn = vec![0.0; n];
        for c in 0..d {
            for v in z.iter_mut() {
                *v = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            }
            // fgn = L z
            for (i, slot) in fgn.iter_mut().enumerate() {
                let row = &self.chol[i * n..i * n + i + 1];
                let mut acc = 0.0;
                for (j, l) in row.iter().enumerate() {
                    acc += l * z[j];
                }
                *slot = acc;
            }
            let mut running = 0.0;
            for i in 0..n {
                running += fgn[i];
                base[(i + 1) * d + c] = running;
            }
        }
        MultiLevelPath::from_base(self.hurst, self.grid.clone(), d, base, None)
            .expect("generator output is well-formed")
    }
}

/// Dense lower Cholesky of the symmetric Toeplitz matrix `A[i][j] = γ(|i−j|)`.
fn cholesky_toeplitz(gamma: &[f64], n: usize) -> Result<Vec<f64>, NoiseError> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gamma[i - j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= gamma[0] * 1e-12 {
                    return Err(NoiseError::GridTooLarge(
                        "covariance factorization lost positive definiteness".into(),
                    ));
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// One-shot convenience wrapper around [`ExactFbmGenerator`].
pub fn gen_base_fbm_exact(
    hurst: Hurst,
    grid: TimeGrid,
    dim: usize,
    seed: RngSeed,
    mvn_scale: bool,
) -> Result<MultiLevelPath, NoiseError> {
    Ok(ExactFbmGenerator::new(hurst, grid, dim, mvn_scale)?.sample(seed))
}
