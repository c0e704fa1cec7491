//! Two-parameter germs `A_{s,t}` and their exact algebra: Riemann sums,
//! the second difference `δA`, and the telescoping identity behind the
//! refinement map.

use super::partition::Partition;
use crate::quad::pairwise_sum;
use rayon::prelude::*;
use std::sync::Arc;

type GermFn = Arc<dyn Fn(f64, f64, &mut [f64]) + Send + Sync>;

/// A family `(s,t) ↦ A_{s,t} ∈ ℝ^d`, deterministic given its captured
/// context (e.g. a sampled path).
#[derive(Clone)]
pub struct Germ {
    pub name: String,
    pub dim: usize,
    /// claimed `(ε₁, ε₂)` from the moment bounds, if the caller states them
    pub claimed_exponents: Option<(f64, f64)>,
    eval: GermFn,
}

impl std::fmt::Debug for Germ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Germ")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("claimed_exponents", &self.claimed_exponents)
            .finish()
    }
}

impl Germ {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim, claimed_exponents: None, eval: Arc::new(eval) }
    }

    /// Scalar germ from a plain closure.
    pub fn scalar(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, 1, move |s, t, out| out[0] = f(s, t))
    }

    pub fn with_exponents(mut self, eps1: f64, eps2: f64) -> Self {
        self.claimed_exponents = Some((eps1, eps2));
        self
    }

    pub fn eval_into(&self, s: f64, t: f64, out: &mut [f64]) {
        debug_assert!(s < t, "germ arguments need s < t");
        (self.eval)(s, t, out);
    }

    pub fn eval(&self, s: f64, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(s, t, &mut out);
        out
    }
}

/// `A^π_{s,t} = Σ A_{t_{i−1}, t_i}` with pairwise per-component reduction;
/// parallel over steps for large partitions, identical result either way.
pub fn riemann_sum(germ: &Germ, partition: &Partition) -> Vec<f64> {
    let pts = partition.points();
    let n = partition.n_steps();
    let d = germ.dim;
    let evals: Vec<Vec<f64>> = if n >= 4096 {
        crate::parallel::run_in_pool(|| {
            (0..n).into_par_iter().map(|i| germ.eval(pts[i], pts[i + 1])).collect()
        })
    } else {
        (0..n).map(|i| germ.eval(pts[i], pts[i + 1])).collect()
    };
    (0..d)
        .map(|c| {
            let comp: Vec<f64> = evals.iter().map(|e| e[c]).collect();
            pairwise_sum(&comp)
        })
        .collect()
}

/// `δA_{s,u,t} = A_{s,t} − A_{s,u} − A_{u,t}`.
pub fn delta_a(germ: &Germ, s: f64, u: f64, t: f64) -> Vec<f64> {
    assert!(s < u && u < t, "need s < u < t");
    let mut out = germ.eval(s, t);
    let left = germ.eval(s, u);
    let right = germ.eval(u, t);
    for c in 0..germ.dim {
        out[c] -= left[c] + right[c];
    }
    out
}

/// Algebraic identity check: `A^π − A^{ρ(π)}` computed directly and as the
/// signed sum of `δA` terms over the inserted midpoint and the decimated
/// triples. Returns the sup-norm of the difference of the two routes, which
/// is pure round-off.
pub fn telescoping_check(germ: &Germ, partition: &Partition) -> f64 {
    let d = germ.dim;
    let direct_pi = riemann_sum(germ, partition);
    let rho = partition.rho_refine();
    let direct_rho = riemann_sum(germ, &rho);
    let mut direct = vec![0.0; d];
    for c in 0..d {
        direct[c] = direct_pi[c] - direct_rho[c];
    }

    let (tprime, inserted) = partition.rho_intermediate();
    let mut via = vec![0.0; d];
    if let Some((a, m, b)) = inserted {
        let delta = delta_a(germ, a, m, b);
        for c in 0..d {
            via[c] += delta[c];
        }
    }
    let mut j = 0;
    while j + 2 < tprime.len() {
        let delta = delta_a(germ, tprime[j], tprime[j + 1], tprime[j + 2]);
        for c in 0..d {
            via[c] -= delta[c];
        }
        j += 2;
    }

    direct
        .iter()
        .zip(&via)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive() -> Germ {
        Germ::scalar("increment", |s, t| t - s)
    }

    fn left_weighted() -> Germ {
        Germ::scalar("s(t-s)", |s, t| s * (t - s))
    }

    fn square() -> Germ {
        Germ::scalar("(t-s)^2", |s, t| (t - s) * (t - s))
    }

    #[test]
    fn riemann_sums_closed_forms() {
        let p = Partition::new(vec![0.0, 0.3, 0.4, 1.0]).unwrap();
        assert!((riemann_sum(&additive(), &p)[0] - 1.0).abs() < 1e-15);

        // Σ t_i (t_{i+1} − t_i) on the dyadic grid = (1 − 2^{−n})/2
        for level in [2u32, 5, 8] {
            let p = Partition::dyadic(0.0, 1.0, level);
            let expect = 0.5 * (1.0 - 2f64.powi(-(level as i32)));
            assert!((riemann_sum(&left_weighted(), &p)[0] - expect).abs() < 1e-14);
        }

        let zero = Germ::scalar("zero", |_, _| 0.0);
        assert_eq!(riemann_sum(&zero, &Partition::dyadic(0.0, 1.0, 3))[0], 0.0);
    }

    #[test]
    fn delta_hand_values() {
        assert_eq!(delta_a(&additive(), 0.0, 0.5, 1.0)[0], 0.0);
        assert!((delta_a(&left_weighted(), 0.0, 0.5, 1.0)[0] + 0.25).abs() < 1e-15);
        assert!((delta_a(&square(), 0.0, 0.5, 1.0)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn delta_of_additive_germ_vanishes_exactly_on_dyadics() {
        // dyadic points make every subtraction exact
        let g = additive();
        for level in 1..8u32 {
            let p = Partition::dyadic(0.0, 1.0, level);
            let pts = p.points();
            for i in 0..pts.len() - 2 {
                assert_eq!(delta_a(&g, pts[i], pts[i + 1], pts[i + 2])[0], 0.0);
            }
        }
    }

    #[test]
    fn telescoping_identity_examples() {
        let p = Partition::dyadic(0.0, 1.0, 3);
        for germ in [additive(), left_weighted(), square()] {
            let sum = riemann_sum(&germ, &p)[0];
            let residual = telescoping_check(&germ, &p);
            assert!(residual <= 1e-12 * (1.0 + sum.abs()), "{}: {residual}", germ.name);
        }
        // for the square germ each decimation triple contributes 2·(2^{-4})²
        let delta = delta_a(&square(), 0.0, 1.0 / 16.0, 2.0 / 16.0)[0];
        assert!((delta - 2.0 * (1.0f64 / 16.0).powi(2)).abs() < 1e-16);
    }

    #[test]
    fn telescoping_identity_odd_partition() {
        let p = Partition::new(vec![0.0, 0.2, 0.45, 0.7, 0.85, 1.0]).unwrap();
        for germ in [left_weighted(), square(), Germ::scalar("sinprod", |s, t| s.sin() * (t.cos() - s.cos()))] {
            let sum = riemann_sum(&germ, &p)[0];
            assert!(telescoping_check(&germ, &p) <= 1e-12 * (1.0 + sum.abs()));
        }
    }
}
