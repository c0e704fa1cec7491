//! Hölder drift functions with certified seminorm bounds.

use rand::RngExt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("unknown builtin drift name: {0}")]
    UnknownName(String),
    #[error("Hölder exponent must lie in (0,1]")]
    BadExponent,
    #[error("certified bound violated at x={x:?}, y={y:?}: |b(x)−b(y)| = {lhs} > {rhs}")]
    HolderViolation { x: Vec<f64>, y: Vec<f64>, lhs: f64, rhs: f64 },
    #[error("certified sup bound violated at x={x:?}: |b(x)| = {lhs} > {rhs}")]
    BoundViolation { x: Vec<f64>, lhs: f64, rhs: f64 },
}

/// Builtins are clamped to this box so boundedness is certified.
pub const CLAMP_RADIUS: f64 = 10.0;

type DriftFn = std::sync::Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A drift `b ∈ C^α` with a certified bound `C` such that `sup|b| ≤ C` and
/// `|b(x) − b(y)| ≤ C|x−y|^α`.
#[derive(Clone)]
pub struct DriftSpec {
    pub name: String,
    pub alpha: f64,
    pub dim: usize,
    pub holder_bound: f64,
    eval: DriftFn,
}

impl std::fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("dim", &self.dim)
            .field("holder_bound", &self.holder_bound)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDrift {
    AbsPow,
    SignPow,
    Smooth,
}

impl FromStr for BuiltinDrift {
    type Err = DriftError;
    fn from_str(s: &str) -> Result<Self, DriftError> {
        match s {
            "abs_pow" => Ok(Self::AbsPow),
            "sign_pow" => Ok(Self::SignPow),
            "smooth" => Ok(Self::Smooth),
            other => Err(DriftError::UnknownName(other.to_string())),
        }
    }
}

fn clamp(x: f64) -> f64 {
    x.clamp(-CLAMP_RADIUS, CLAMP_RADIUS)
}

/// The builtin drift gallery.
///
/// * `abs_pow`: `b_i(x) = 1 − |clamp(x_i)|^α` — α-Hölder, nonsmooth at 0.
/// * `sign_pow`: `b_i(x) = sign(x_i)|clamp(x_i)|^α`.
/// * `smooth`: a fixed bounded trigonometric drift, Lipschitz.
pub fn builtin_drift(kind: BuiltinDrift, alpha: f64, dim: usize) -> Result<DriftSpec, DriftError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(DriftError::BadExponent);
    }
    assert!(dim > 0, "dimension must be positive");
    let sqrt_d = (dim as f64).sqrt();
    let r_pow = CLAMP_RADIUS.powf(alpha);
    let (name, bound, eval): (&str, f64, DriftFn) = match kind
    {
        BuiltinDrift::AbsPow => (
            "abs_pow",
            sqrt_d * (r_pow - 1.0).max(1.0),
            Arc::new(move |x, out| {
                for (xi, o) in x.iter().zip(out.iter_mut()) {
                    *o = 1.0 - clamp(*xi).abs().powf(alpha);
                }
            }),
        ),
        BuiltinDrift::SignPow => (
            "sign_pow",
            sqrt_d * r_pow.max(2.0),
            Arc::new(move |x, out| {
                for (xi, o) in x.iter().zip(out.iter_mut()) {
                    let c = clamp(*xi);
                    *o = c.signum() * c.abs().powf(alpha);
                }
            }),
        ),
        BuiltinDrift::Smooth => (
            "smooth",
            2.0 * sqrt_d,
            Arc::new(move |x, out| {
                let d = x.len();
                for i in 0..d {
                    out[i] = (x[i] + 0.5 * x[(i + 1) % d]).cos();
                }
            }),
        ),
    };
    Ok(DriftSpec { name: name.to_string(), alpha, dim, holder_bound: bound, eval })
}

/// Builtin lookup by name (for configs and the CLI).
pub fn builtin_drift_by_name(name: &str, alpha: f64, dim: usize) -> Result<DriftSpec, DriftError> {
    builtin_drift(BuiltinDrift::from_str(name)?, alpha, dim)
}

impl DriftSpec {
    /// `b ≡ c` in every component.
    pub fn constant(dim: usize, c: f64) -> DriftSpec {
        DriftSpec {
            name: format!("const_{c}"),
            alpha: 1.0,
            dim,
            holder_bound: c.abs().max(1e-12),
            eval: Arc::new(move |_, out| out.fill(c)),
        }
    }

    /// `b ≡ 0`.
    pub fn zero(dim: usize) -> DriftSpec {
        let mut d = Self::constant(dim, 0.0);
        d.name = "zero".into();
        d
    }

    /// Custom drift with caller-certified exponent and bound.
    pub fn custom(
        name: impl Into<String>,
        alpha: f64,
        dim: usize,
        holder_bound: f64,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> DriftSpec {
        DriftSpec { name: name.into(), alpha, dim, holder_bound, eval: Arc::new(eval) }
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.eval)(x, out);
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Spot-check the certified Hölder and sup bounds on random pairs drawn
    /// from a box slightly larger than the clamp region.
    pub fn spot_check(&self, n_pairs: usize, seed: crate::rng::RngSeed) -> Result<(), DriftError> {
        let mut rng = seed.rng();
        let slack = 1.0 + 1e-9;
        let mut x = vec![0.0; self.dim];
        let mut y = vec![0.0; self.dim];
        let mut bx = vec![0.0; self.dim];
        let mut by = vec![0.0; self.dim];
        for _ in 0..n_pairs {
            for v in x.iter_mut().chain(y.iter_mut()) {
                *v = rng.random_range(-1.2 * CLAMP_RADIUS..1.2 * CLAMP_RADIUS);
            }
            self.eval_into(&x, &mut bx);
            self.eval_into(&y, &mut by);
            let bx_norm = bx.iter().map(|v| v * v).sum::<f64>().sqrt();
            if bx_norm > self.holder_bound * slack {
                return Err(DriftError::BoundViolation {
                    x: x.clone(),
                    lhs: bx_norm,
                    rhs: self.holder_bound,
                });
            }
            let diff = bx
                .iter()
                .zip(&by)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let rhs = self.holder_bound * dist.powf(self.alpha);
            if diff > rhs * slack {
                return Err(DriftError::HolderViolation {
                    x: x.clone(),
                    y: y.clone(),
                    lhs: diff,
                    rhs,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    #[test]
    fn abs_pow_values() {
        let b = builtin_drift(BuiltinDrift::AbsPow, 1.0, 3).unwrap();
        assert_eq!(b.eval(&[0.0, 0.0, 0.0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn sign_pow_values() {
        let b = builtin_drift(BuiltinDrift::SignPow, 0.5, 1).unwrap();
        assert!((b.eval(&[0.25])[0] - 0.5).abs() < 1e-15);
        assert!((b.eval(&[-0.25])[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn builtins_pass_certified_spot_check() {
        for kind in [BuiltinDrift::AbsPow, BuiltinDrift::SignPow, BuiltinDrift::Smooth] {
            for alpha in [0.3, 0.8, 1.0] {
                for dim in [1usize, 2] {
                    let b = builtin_drift(kind, alpha, dim).unwrap();
                    b.spot_check(10_000, RngSeed::new(17, 0)).unwrap();
                }
            }
        }
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(
            builtin_drift_by_name("quartic", 0.5, 1),
            Err(DriftError::UnknownName(_))
        ));
        assert_eq!(builtin_drift(BuiltinDrift::AbsPow, 1.5, 1).unwrap_err(), DriftError::BadExponent);
    }
}
