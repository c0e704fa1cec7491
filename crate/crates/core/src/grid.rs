//! Uniform time grids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid needs end > start and finite bounds")]
    InvalidRange,
    #[error("grid needs at least one step")]
    NoSteps,
}

/// A uniform grid `start = t_0 < t_1 < … < t_n = end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    n_steps: usize,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, n_steps: usize) -> Result<Self, GridError> {
        if !start.is_finite() || !end.is_finite() || end <= start {
            return Err(GridError::InvalidRange);
        }
        if n_steps == 0 {
            return Err(GridError::NoSteps);
        }
        let span = end - start;
        let mut points: Vec<f64> = (0..=n_steps)
            .map(|i| start + span * (i as f64 / n_steps as f64))
            .collect();
        points[0] = start;
        points[n_steps] = end;
        Ok(Self { start, end, n_steps, points })
    }

    /// Grid on `[0,1]` with `n_steps` steps.
    pub fn unit(n_steps: usize) -> Self {
        Self::new(0.0, 1.0, n_steps).expect("unit grid is valid")
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Step size `Δ = (end − start)/n_steps`.
    pub fn dt(&self) -> f64 {
        (self.end - self.start) / self.n_steps as f64
    }

    /// Index of the grid point equal to `t`, within `Δ·1e−9`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let dt = self.dt();
        let raw = (t - self.start) / dt;
        let idx = raw.round();
        if idx < 0.0 || idx > self.n_steps as f64 {
            return None;
        }
        let idx = idx as usize;
        if (self.points[idx] - t).abs() <= dt * 1e-9 {
            Some(idx)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact_and_uniform() {
        let g = TimeGrid::new(0.0, 1.0, 7).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[7], 1.0);
        let dt = g.dt();
        for w in g.points().windows(2) {
            assert!(((w[1] - w[0]) - dt).abs() <= dt * 1e-12);
        }
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::unit(8);
        assert_eq!(g.index_of(0.5), Some(4));
        assert_eq!(g.index_of(1.0), Some(8));
        assert_eq!(g.index_of(0.3), None);
        assert_eq!(g.index_of(1.2), None);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert_eq!(TimeGrid::new(1.0, 1.0, 4).unwrap_err(), GridError::InvalidRange);
        assert_eq!(TimeGrid::new(0.0, 1.0, 0).unwrap_err(), GridError::NoSteps);
    }
}
