//! Partitions, their mesh statistics, and the pair/triple sets that restrict
//! where germs are sampled.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition needs at least two strictly increasing points")]
    TooFewPoints,
    #[error("partition points must be strictly increasing and finite")]
    NotIncreasing,
}

/// Ordered grid points `t_0 < t_1 < … < t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

/// `[π] = (t−s)/n`, `|π| = max step`, `Δπ = min step`; a partition is
/// regular when `Δπ ≥ |π|/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshStats {
    pub avg: f64,
    pub max: f64,
    pub min: f64,
    pub is_regular: bool,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self, PartitionError> {
        if points.len() < 2 {
            return Err(PartitionError::TooFewPoints);
        }
        if points.iter().any(|p| !p.is_finite())
            || points.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(PartitionError::NotIncreasing);
        }
        Ok(Self { points })
    }

    /// Uniform partition of `[s,t]` with `n` steps.
    pub fn uniform(s: f64, t: f64, n: usize) -> Self {
        assert!(n >= 1 && t > s);
        let mut points: Vec<f64> = (0..=n).map(|i| s + (t - s) * i as f64 / n as f64).collect();
        points[0] = s;
        points[n] = t;
        Self { points }
    }

    /// Dyadic partition of `[s,t]` at `level` (2^level steps).
    pub fn dyadic(s: f64, t: f64, level: u32) -> Self {
        Self::uniform(s, t, 1usize << level)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn is_trivial(&self) -> bool {
        self.n_steps() == 1
    }

    pub fn mesh_stats(&self) -> MeshStats {
        let n = self.n_steps() as f64;
        let avg = (self.last() - self.first()) / n;
        let mut max = 0.0_f64;
        let mut min = f64::INFINITY;
        for w in self.points.windows(2) {
            let step = w[1] - w[0];
            max = max.max(step);
            min = min.min(step);
        }
        // equality counts as regular; allow round-off at the boundary
        let is_regular = 2.0 * min >= max * (1.0 - 1e-12);
        MeshStats { avg, max, min, is_regular }
    }

    /// The refinement map `ρ`: for odd step count, split the first maximal
    /// step at its midpoint; then keep every second point, endpoints
    /// included. The trivial partition is a fixed point.
    pub fn rho_refine(&self) -> Partition {
        if self.is_trivial() {
            return self.clone();
        }
        let (intermediate, _) = self.rho_intermediate();
        let decimated: Vec<f64> = intermediate.iter().copied().step_by(2).collect();
        Partition { points: decimated }
    }

    /// The intermediate point set of `ρ` (after the midpoint insertion, before
    /// decimation) together with the inserted triple `(t_{i−1}, t'_i, t_i)`
    /// when the step count was odd.
    pub(crate) fn rho_intermediate(&self) -> (Vec<f64>, Option<(f64, f64, f64)>) {
        let n = self.n_steps();
        if n == 1 {
            return (self.points.clone(), None);
        }
        if n.is_multiple_of(2) {
            return (self.points.clone(), None);
        }
        // first index attaining the maximal step; steps that tie up to
        // round-off count as maximal so dyadic-style ties pick the first
        let mut max_step = 0.0_f64;
        for i in 1..=n {
            max_step = max_step.max(self.points[i] - self.points[i - 1]);
        }
        let mut best_i = 1usize;
        for i in 1..=n {
            if self.points[i] - self.points[i - 1] >= max_step * (1.0 - 1e-12) {
                best_i = i;
                break;
            }
        }
        let mid = 0.5 * (self.points[best_i] + self.points[best_i - 1]);
        let mut out = Vec::with_capacity(n + 2);
        out.extend_from_slice(&self.points[..best_i]);
        out.push(mid);
        out.extend_from_slice(&self.points[best_i..]);
        (out, Some((self.points[best_i - 1], mid, self.points[best_i])))
    }
}

/// Parameters `(S, T, M)` of the shifted pair and triple sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSetSpec {
    pub start: f64,
    pub end: f64,
    pub shift: f64,
}

impl PairSetSpec {
    pub fn new(start: f64, end: f64, shift: f64) -> Self {
        assert!(start < end && shift >= 0.0);
        Self { start, end, shift }
    }

    /// `(s,t) ∈ [S,T]²_M`: `S ≤ s < t ≤ T` and `s − M(t−s) ≥ S`.
    pub fn pair_in_set(&self, s: f64, t: f64) -> bool {
        self.start <= s && s < t && t <= self.end && s - self.shift * (t - s) >= self.start
    }

    /// `(s,u,t) ∈ [S,T]³_M`: the pair is in the set and `u ∈ (S,T)`.
    pub fn triple_in_set(&self, s: f64, u: f64, t: f64) -> bool {
        self.pair_in_set(s, t) && self.start < u && u < self.end
    }

    /// The overline triple set: additionally `(u−s), (t−u) ≥ (t−s)/3`.
    /// Boundary cases (e.g. `u − s` exactly a third) count as members, with a
    /// relative round-off allowance.
    pub fn triple_in_bar_set(&self, s: f64, u: f64, t: f64) -> bool {
        let third = (t - s) / 3.0 * (1.0 - 1e-12);
        self.triple_in_set(s, u, t) && u - s >= third && t - u >= third
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mesh_stats_examples() {
        let p = Partition::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let m = p.mesh_stats();
        assert!((m.avg - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.max, 0.5);
        assert_eq!(m.min, 0.25);
        assert!(m.is_regular, "0.25 ≥ 0.5/2 with equality");

        let d = Partition::dyadic(0.0, 1.0, 4).mesh_stats();
        assert_eq!(d.avg, 1.0 / 16.0);
        assert_eq!(d.max, d.min);
        assert!(d.is_regular);

        let bad = Partition::new(vec![0.0, 0.1, 1.0]).unwrap().mesh_stats();
        assert_eq!(bad.avg, 0.5);
        assert_eq!(bad.max, 0.9);
        assert!((bad.min - 0.1).abs() < 1e-15);
        assert!(!bad.is_regular);
    }

    #[test]
    fn rho_examples() {
        // even step count: every second point
        let p = Partition::new(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(p.rho_refine().points(), &[0.0, 0.5, 1.0]);

        // terminal case
        let p = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(p.rho_refine().points(), &[0.0, 1.0]);

        // odd case: split the first maximal step, decimate; twice reaches trivial
        let p = Partition::new(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        let r = p.rho_refine();
        assert_eq!(r.points(), &[0.0, 1.0 / 3.0, 1.0]);
        let rr = r.rho_refine();
        assert_eq!(rr.points(), &[0.0, 1.0]);
        // mesh growth ≥ 3/2 at each application
        assert!(r.mesh_stats().avg >= 1.5 * p.mesh_stats().avg - 1e-15);
        assert!(rr.mesh_stats().avg >= 1.5 * r.mesh_stats().avg - 1e-15);
    }

    #[test]
    fn trivial_partition_is_fixed_point() {
        let p = Partition::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(p.rho_refine().points(), p.points());
    }

    #[test]
    fn pair_and_triple_sets() {
        let spec = PairSetSpec::new(0.0, 1.0, 0.0);
        assert!(spec.pair_in_set(0.0, 1.0));
        assert!(spec.pair_in_set(0.4, 0.9), "M = 0 imposes nothing extra");

        let spec1 = PairSetSpec::new(0.0, 1.0, 1.0);
        assert!(!spec1.pair_in_set(0.4, 0.9), "0.4 − 0.5 < 0");
        assert!(spec1.pair_in_set(0.5, 0.9));

        let bar = PairSetSpec::new(0.0, 1.0, 0.0);
        assert!(bar.triple_in_bar_set(0.5, 0.6, 0.8));
        assert!(!bar.triple_in_bar_set(0.5, 0.51, 0.8), "u too close to s");
    }

    fn random_regular_partition(seed: u64, n_steps: usize) -> Partition {
        // steps uniform in [1.02, 1.98] normalized to [0,1]: regular by construction
        let raw = crate::rng::standard_normal_vec(crate::rng::RngSeed::new(seed, 0), n_steps);
        let steps: Vec<f64> = raw
            .iter()
            .map(|z| 1.5 + 0.48 * (z.sin()))
            .collect();
        let total: f64 = steps.iter().sum();
        let mut points = vec![0.0];
        let mut acc = 0.0;
        for s in &steps {
            acc += s / total;
            points.push(acc);
        }
        *points.last_mut().unwrap() = 1.0;
        Partition::new(points).unwrap()
    }

    proptest! {
        #[test]
        fn mesh_ordering_invariant(seed in 0u64..500, n in 2usize..40) {
            let p = random_regular_partition(seed, n);
            let m = p.mesh_stats();
            prop_assert!(m.min <= m.avg + 1e-15);
            prop_assert!(m.avg <= m.max + 1e-15);
        }

        #[test]
        fn rho_growth_and_regularity(seed in 0u64..500, n in 2usize..60) {
            let p = random_regular_partition(seed, n);
            prop_assert!(p.mesh_stats().is_regular);
            let r = p.rho_refine();
            prop_assert!(r.mesh_stats().is_regular, "ρ preserves regularity");
            if !p.is_trivial() {
                prop_assert!(
                    r.mesh_stats().avg >= 1.5 * p.mesh_stats().avg - 1e-12,
                    "[ρ(π)] ≥ (3/2)[π]"
                );
            }
        }
    }
}
