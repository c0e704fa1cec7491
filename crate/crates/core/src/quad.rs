//! Shared numerics: deterministic summation, trapezoid rules, tanh–sinh
//! quadrature for endpoint-singular integrands, and Gauss–Hermite nodes.

/// Pairwise (tree) summation. Deterministic for a fixed input order, which is
/// what makes parallel Monte Carlo aggregation independent of worker count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean via pairwise summation.
pub fn pairwise_mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    pairwise_sum(xs) / xs.len() as f64
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(dt: f64, vals: &[f64]) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    let inner: f64 = vals[1..vals.len() - 1].iter().sum();
    dt * (0.5 * (vals[0] + vals[vals.len() - 1]) + inner)
}

/// Cumulative trapezoid integral; `out[0] = 0`.
pub fn cumulative_trapezoid(dt: f64, vals: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vals.len()];
    for i in 1..vals.len() {
        out[i] = out[i - 1] + 0.5 * dt * (vals[i - 1] + vals[i]);
    }
    out
}

/// Tanh–sinh (double exponential) quadrature of `f` over `[a,b]`.
///
/// The integrand is called as `f(x, x − a, b − x)`; the endpoint distances are
/// computed without cancellation so integrable endpoint singularities like
/// `(x−a)^{−0.9}` can be evaluated from the distance arguments directly.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(b > a && a.is_finite() && b.is_finite());
    let r = 0.5 * (b - a);
    let t_max = 6.5_f64;
    let mut prev = f64::NAN;
    let mut result = 0.0;
    // level 0 has h = 1; each level halves h and re-sums everything
    for level in 0..=11u32 {
        let h = 1.0 / f64::from(1u32 << level);
        let steps = (t_max / h).ceil() as i64;
        let mut sum = 0.0;
        for k in -steps..=steps {
            let t = k as f64 * h;
            let u = std::f64::consts::FRAC_PI_2 * t.sinh();
            // 1 ± tanh(u) without cancellation
            let emu = (-2.0 * u.abs()).exp();
            let near = 2.0 * r * emu / (1.0 + emu);
            let far = 2.0 * r / (1.0 + emu);
            let (da, db) = if u < 0.0 { (near, far) } else { (far, near) };
            let cosh_u = u.cosh();
            let w = h * r * std::f64::consts::FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            if !w.is_finite() || w < 1e-280 || da == 0.0 || db == 0.0 {
                continue;
            }
            let x = if u < 0.0 { a + da } else { b - db };
            let fx = f(x, da, db);
            if fx.is_finite() {
                sum += w * fx;
            }
        }
        result = sum;
        if level >= 3 && (result - prev).abs() <= rel_tol * (result.abs() + 1e-300) {
            break;
        }
        prev = result;
    }
    result
}

/// Nodes and weights for `∫ f(u) e^{−u²} du ≈ Σ wᵢ f(uᵢ)` (physicists'
/// convention). Newton iteration on the normalized Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // p1 ends as the normalized H_n(z), p2 as H_{n-1}(z)
            let mut p1 = std::f64::consts::PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_benign_data() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let vals: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        assert!((trapezoid_uniform(0.1, &vals) - 2.0).abs() < 1e-14);
        let cum = cumulative_trapezoid(0.1, &vals);
        assert_eq!(cum[0], 0.0);
        assert!((cum[10] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let smooth = tanh_sinh(|x, _, _| x.cos(), 0.0, 1.0, 1e-12);
        assert!((smooth - 1.0_f64.sin()).abs() < 1e-11);

        // ∫₀¹ x^{−1/2} dx = 2, singular at the left endpoint
        let singular = tanh_sinh(|_, da, _| da.powf(-0.5), 0.0, 1.0, 1e-12);
        assert!((singular - 2.0).abs() < 1e-10, "got {singular}");

        // ∫₀¹ x^{−0.9} dx = 10
        let harsh = tanh_sinh(|_, da, _| da.powf(-0.9), 0.0, 1.0, 1e-12);
        assert!((harsh - 10.0).abs() < 1e-8, "got {harsh}");

        // log singularity: ∫₀¹ ln(1/x) dx = 1
        let logi = tanh_sinh(|_, da, _| -da.ln(), 0.0, 1.0, 1e-12);
        assert!((logi - 1.0).abs() < 1e-11, "got {logi}");
    }

    #[test]
    fn gauss_hermite_moments() {
        for n in [16usize, 32, 64] {
            let (x, w) = gauss_hermite(n);
            let sqrt_pi = std::f64::consts::PI.sqrt();
            let m0: f64 = w.iter().sum();
            assert!((m0 - sqrt_pi).abs() < 1e-12 * sqrt_pi, "n={n} m0={m0}");
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((m2 - sqrt_pi / 2.0).abs() < 1e-11, "n={n} m2={m2}");
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert!((m4 - 0.75 * sqrt_pi).abs() < 1e-10, "n={n} m4={m4}");
            let m1: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
            assert!(m1.abs() < 1e-12);
        }
    }
}
