//! Discretely sampled paths of `B^H` together with all intermediate
//! iterated time-integrals.

use crate::grid::TimeGrid;
use crate::hurst::Hurst;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NoiseError {
    #[error("grid too large for the exact generator, or covariance not positive definite: {0}")]
    GridTooLarge(String),
    #[error("Hurst parameters of base path and lift target do not match")]
    HurstMismatch,
    #[error("time is not a grid point")]
    OffGrid,
    #[error("grid has too few points for the requested derivative order")]
    InsufficientGrid,
    #[error("requested derivative level is not stored in this path")]
    DerivativeUnavailable,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// A base fractional Brownian path plus its iterated time-integrals.
///
/// `levels[0]` holds the base process `B^{H−⌊H⌋}`, `levels[k]` its `k`-fold
/// cumulative integral, so `levels[⌊H⌋]` is the extended process `B^H`. Each
/// level stores `d` components per grid point, point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLevelPath {
    hurst: Hurst,
    grid: TimeGrid,
    dim: usize,
    levels: Vec<Vec<f64>>,
    w_increments: Option<Vec<f64>>,
}

impl MultiLevelPath {
    /// Wrap raw base-process samples (`hurst` must have zero integer part).
    pub fn from_base(
        hurst: Hurst,
        grid: TimeGrid,
        dim: usize,
        base: Vec<f64>,
        w_increments: Option<Vec<f64>>,
    ) -> Result<Self, NoiseError> {
        if !hurst.is_base() {
            return Err(NoiseError::HurstMismatch);
        }
        if base.len() != grid.n_points() * dim {
            return Err(NoiseError::InvalidInput("base length must be n_points·dim"));
        }
        if let Some(w) = &w_increments
            && w.len() != grid.n_steps() * dim {
                return Err(NoiseError::InvalidInput("increment length must be n_steps·dim"));
            }
        Ok(Self { hurst, grid, dim, levels: vec![base], w_increments })
    }

    /// Compute the `⌊H⌋` iterated cumulative integrals by trapezoid quadrature.
    ///
    /// The target's fractional part must equal the base parameter.
    pub fn lift(&self, target: Hurst) -> Result<MultiLevelPath, NoiseError> {
        if (self.hurst.fractional_part() - target.fractional_part()).abs() > 1e-12 {
            return Err(NoiseError::HurstMismatch);
        }
        let n_pts = self.grid.n_points();
        let dt = self.grid.dt();
        let mut levels = Vec::with_capacity(target.integer_part() + 1);
        levels.push(self.levels[0].clone());
        for k in 1..=target.integer_part() {
            let prev = &levels[k - 1];
            let mut cur = vec![0.0; n_pts * self.dim];
            for i in 1..n_pts {
                for c in 0..self.dim {
                    cur[i * self.dim + c] = cur[(i - 1) * self.dim + c]
                        + 0.5 * dt * (prev[(i - 1) * self.dim + c] + prev[i * self.dim + c]);
                }
            }
            levels.push(cur);
        }
        Ok(MultiLevelPath {
            hurst: target,
            grid: self.grid.clone(),
            dim: self.dim,
            levels,
            w_increments: self.w_increments.clone(),
        })
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Flat samples of level `k` (point-major).
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    /// The top level: the process `B^H` itself.
    pub fn top(&self) -> &[f64] {
        &self.levels[self.levels.len() - 1]
    }

    /// The `d`-vector of level `k` at grid index `i`.
    pub fn value(&self, k: usize, i: usize) -> &[f64] {
        &self.levels[k][i * self.dim..(i + 1) * self.dim]
    }

    /// Samples of `∂^order B^H`, i.e. `levels[⌊H⌋ − order]`.
    pub fn derivative_level(&self, order: usize) -> Result<&[f64], NoiseError> {
        let floor = self.hurst.integer_part();
        if order > floor {
            return Err(NoiseError::DerivativeUnavailable);
        }
        Ok(&self.levels[floor - order])
    }

    /// Underlying Brownian increments on the path grid, when the path came
    /// from the Mandelbrot–van Ness grid generator.
    pub fn w_increments(&self) -> Option<&[f64]> {
        self.w_increments.as_deref()
    }

    pub(crate) fn attach_increments(&mut self, w: Vec<f64>) {
        debug_assert_eq!(w.len(), self.grid.n_steps() * self.dim);
        self.w_increments = Some(w);
    }

    /// Serialize as CSV with header `t,level,component,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,level,component,value")?;
        for (i, t) in self.grid.points().iter().enumerate() {
            for (k, level) in self.levels.iter().enumerate() {
                for c in 0..self.dim {
                    writeln!(w, "{},{},{},{}", t, k, c, level[i * self.dim + c])?;
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}
