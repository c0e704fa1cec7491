//! Empirical moment-rate probes for germs: the slope of `‖A_{s,t}‖_p`
//! against `t−s`, and of the conditionally shifted second difference
//! `‖E^{s−M(t−s)} δA_{s,u,t}‖_p`, sampled inside the declared pair and
//! triple sets.

use super::germ::Germ;
use super::partition::PairSetSpec;
use crate::rate::{FitError, RateEstimate, loglog_fit};
use crate::rng::{RngSeed, splitmix64};


/// Replicate contexts of one germ (a single entry for deterministic germs).
pub struct GermFamily {
    pub germs: Vec<Germ>,
}

impl GermFamily {
    pub fn new(germs: Vec<Germ>) -> Self {
        assert!(!germs.is_empty());
        let d = germs[0].dim;
        assert!(germs.iter().all(|g| g.dim == d), "replicates must share a dimension");
        Self { germs }
    }

    pub fn deterministic(germ: Germ) -> Self {
        Self::new(vec![germ])
    }

    pub fn dim(&self) -> usize {
        self.germs[0].dim
    }
}

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    /// values of `t−s` to sample (all must admit pairs inside the set)
    pub scales: Vec<f64>,
    pub pairs_per_scale: usize,
    /// even moment order `p`
    pub p_moment: u32,
    pub seed: RngSeed,
}

impl ProbeConfig {
    pub fn new(seed: RngSeed) -> Self {
        Self {
            scales: vec![0.02, 0.04, 0.08, 0.16, 0.32],
            pairs_per_scale: 16,
            p_moment: 2,
            seed,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sample_anchor(rng: &mut impl rand::RngExt, lo: f64, hi: f64) -> f64 {
    if hi > lo { rng.random_range(lo..hi) } else { lo }
}

/// `(E ‖A_{s,t}‖^p)^{1/p}` against `t−s`, pairs drawn uniformly from
/// `[S,T]²_M` at each scale.
pub fn moment_rate_probe(
    family: &GermFamily,
    spec: &PairSetSpec,
    cfg: &ProbeConfig,
) -> Result<RateEstimate, FitError> {
    let p = f64::from(cfg.p_moment);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rng = cfg.seed.derived("moment-rate-probe", 0).rng();
    for &scale in &cfg.scales {
        // nudge the lower anchor up so round-off cannot spill below S
        let lo = spec.start + spec.shift * scale * (1.0 + 1e-12) + 1e-300;
        let hi = spec.end - scale;
        if hi < lo {
            continue;
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..cfg.pairs_per_scale {
            let s = sample_anchor(&mut rng, lo, hi);
            let t = s + scale;
            for germ in &family.germs {
                acc += norm(&germ.eval(s, t)).powf(p);
                count += 1;
            }
        }
        if count > 0 && acc > 0.0 {
            xs.push(scale);
            ys.push((acc / count as f64).powf(1.0 / p));
        }
    }
    loglog_fit(&xs, &ys)
}

/// Estimates `E^{s_cond} δA_{s,u,t}` for one replicate context.
pub trait ConditionalDeltaEstimator: Sync {
    fn dim(&self) -> usize;
    fn replicates(&self) -> usize;
    fn estimate(&self, replicate: usize, s_cond: f64, s: f64, u: f64, t: f64) -> Vec<f64>;
}

/// Nested Monte Carlo estimator with antithetic future resampling: the
/// sampler draws one future from the supplied generator (flipping the draws
/// when `antithetic` is set) and returns the corresponding `δA` sample.
pub struct NestedConditional<F> {
    pub dim: usize,
    pub replicates: usize,
    /// inner sample count (antithetic pairs, so must be even)
    pub inner: usize,
    pub seed: RngSeed,
    pub sampler: F,
}

impl<F> ConditionalDeltaEstimator for NestedConditional<F>
where
    F: Fn(usize, f64, f64, f64, f64, &mut rand_pcg::Pcg64, bool) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn replicates(&self) -> usize {
        self.replicates
    }

    fn estimate(&self, replicate: usize, s_cond: f64, s: f64, u: f64, t: f64) -> Vec<f64> {
        assert!(self.inner >= 2 && self.inner.is_multiple_of(2), "inner samples come in antithetic pairs");
        let mut acc = vec![0.0; self.dim];
        let coord_hash = splitmix64(s.to_bits())
            ^ splitmix64(u.to_bits().rotate_left(17))
            ^ splitmix64(t.to_bits().rotate_left(34))
            ^ splitmix64(s_cond.to_bits().rotate_left(51));
        for j in 0..self.inner / 2 {
            let call_seed = RngSeed::new(
                self.seed.master_seed,
                splitmix64(self.seed.stream_id ^ coord_hash ^ (replicate as u64) << 20 ^ j as u64),
            );
            let mut rng_a = call_seed.rng();
            let a = (self.sampler)(replicate, s_cond, s, u, t, &mut rng_a, false);
            let mut rng_b = call_seed.rng();
            let b = (self.sampler)(replicate, s_cond, s, u, t, &mut rng_b, true);
            for c in 0..self.dim {
                acc[c] += 0.5 * (a[c] + b[c]);
            }
        }
        let inv = 2.0 / self.inner as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        acc
    }
}

/// `(E ‖E^{s−M(t−s)} δA_{s,u,t}‖^p)^{1/p}` against `t−s`, with `u` the
/// midpoint (always inside the overline triple set).
pub fn conditional_rate_probe(
    estimator: &dyn ConditionalDeltaEstimator,
    spec: &PairSetSpec,
    cfg: &ProbeConfig,
) -> Result<RateEstimate, FitError> {
    let p = f64::from(cfg.p_moment);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rng = cfg.seed.derived("conditional-rate-probe", 0).rng();
    for &scale in &cfg.scales {
        // nudge the lower anchor up so round-off cannot spill below S
        let lo = spec.start + spec.shift * scale * (1.0 + 1e-12) + 1e-300;
        let hi = spec.end - scale;
        if hi < lo {
            continue;
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..cfg.pairs_per_scale {
            let s = sample_anchor(&mut rng, lo, hi);
            let t = s + scale;
            let u = s + 0.5 * scale;
            let s_cond = s - spec.shift * scale;
            for rep in 0..estimator.replicates() {
                acc += norm(&estimator.estimate(rep, s_cond, s, u, t)).powf(p);
                count += 1;
            }
        }
        if count > 0 && acc > 0.0 {
            xs.push(scale);
            ys.push((acc / count as f64).powf(1.0 / p));
        }
    }
    loglog_fit(&xs, &ys)
}

#[derive(Debug, Clone)]
pub struct GermProbeReport {
    pub moment_rate: RateEstimate,
    /// present only when the germ exposes a conditional estimator
    pub conditional_rate: Option<RateEstimate>,
}

/// Run both probes; the conditional leg is skipped (not failed) when no
/// estimator is supplied.
pub fn germ_rate_probe(
    family: &GermFamily,
    conditional: Option<&dyn ConditionalDeltaEstimator>,
    spec: &PairSetSpec,
    cfg: &ProbeConfig,
) -> Result<GermProbeReport, FitError> {
    let moment_rate = moment_rate_probe(family, spec, cfg)?;
    let conditional_rate = match conditional {
        Some(est) => Some(conditional_rate_probe(est, spec, cfg)?),
        None => None,
    };
    Ok(GermProbeReport { moment_rate, conditional_rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_deterministic_germ_has_unit_slope() {
        let family = GermFamily::deterministic(Germ::scalar("increment", |s, t| t - s));
        let spec = PairSetSpec::new(0.0, 1.0, 0.0);
        let cfg = ProbeConfig::new(RngSeed::new(1, 0));
        let fit = moment_rate_probe(&family, &spec, &cfg).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.01, "slope {}", fit.slope);
    }

    #[test]
    fn power_law_germ_recovered() {
        let family = GermFamily::deterministic(Germ::scalar("pow08", |s, t| (t - s).powf(0.8)));
        let spec = PairSetSpec::new(0.0, 1.0, 1.0);
        let cfg = ProbeConfig::new(RngSeed::new(2, 0));
        let fit = moment_rate_probe(&family, &spec, &cfg).unwrap();
        assert!((fit.slope - 0.8).abs() < 0.02, "slope {}", fit.slope);
    }

    #[test]
    fn conditional_probe_on_deterministic_delta() {
        // A_{s,t} = (t−s)^θ has δA = (t−s)^θ(1 − 2^{1−θ}) at the midpoint,
        // and the trivial estimator makes E^{s_cond} the identity
        struct Exact;
        impl ConditionalDeltaEstimator for Exact {
            fn dim(&self) -> usize {
                1
            }
            fn replicates(&self) -> usize {
                1
            }
            fn estimate(&self, _r: usize, _sc: f64, s: f64, u: f64, t: f64) -> Vec<f64> {
                let theta = 1.5f64;
                vec![(t - s).powf(theta) - (u - s).powf(theta) - (t - u).powf(theta)]
            }
        }
        let spec = PairSetSpec::new(0.0, 1.0, 1.0);
        let cfg = ProbeConfig::new(RngSeed::new(3, 0));
        let fit = conditional_rate_probe(&Exact, &spec, &cfg).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.01, "slope {}", fit.slope);
    }

    #[test]
    fn nested_conditional_averages_antithetically() {
        // sampler returns c + ξ with ξ from the rng; antithetic flip cancels
        // the noise exactly, so the estimate is the constant
        let est = NestedConditional {
            dim: 1,
            replicates: 1,
            inner: 8,
            seed: RngSeed::new(4, 0),
            sampler: |_rep, _sc, s, _u, t: f64, rng: &mut rand_pcg::Pcg64, anti: bool| {
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                let xi = if anti { -z } else { z };
                vec![(t - s) + xi]
            },
        };
        let v = est.estimate(0, 0.0, 0.2, 0.3, 0.4);
        assert!((v[0] - 0.2).abs() < 1e-12, "antithetic pairing cancels odd noise: {}", v[0]);
    }

    #[test]
    fn full_probe_report() {
        let family = GermFamily::deterministic(Germ::scalar("increment", |s, t| t - s));
        let spec = PairSetSpec::new(0.0, 1.0, 1.0);
        let cfg = ProbeConfig::new(RngSeed::new(5, 0));
        let report = germ_rate_probe(&family, None, &spec, &cfg).unwrap();
        assert!(report.conditional_rate.is_none());
        assert!((report.moment_rate.slope - 1.0).abs() < 0.01);
    }
}
