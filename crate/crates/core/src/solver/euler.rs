//! Explicit Euler on the degenerate system form
//! `dU¹ = dB^{H̄}, dU² = U¹ dt, …, dX = (b(X) + U^{⌊H⌋}) dt`.
//!
//! `U¹` is the base process itself (its increments are used exactly); the
//! higher `U^j` and `X` advance by left-point Euler. For `⌊H⌋ = 0` the system
//! degenerates to the SDE itself and the noise increment is added exactly.

use crate::drift::DriftSpec;
use crate::grid::TimeGrid;
use crate::noise::MultiLevelPath;
use std::io::Write;

/// Euler solution: `X` and the chain `U¹ … U^{⌊H⌋}`.
#[derive(Debug, Clone)]
pub struct SolutionPath {
    pub grid: TimeGrid,
    pub dim: usize,
    /// flat point-major samples of `X`
    pub x: Vec<f64>,
    /// `u_levels[j]` holds `U^{j+1}`
    pub u_levels: Vec<Vec<f64>>,
}

impl SolutionPath {
    /// CSV with header `t,component,x,u1,...,uk`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t,component,x")?;
        for j in 1..=self.u_levels.len() {
            write!(w, ",u{j}")?;
        }
        writeln!(w)?;
        for (i, t) in self.grid.points().iter().enumerate() {
            for c in 0..self.dim {
                write!(w, "{},{},{}", t, c, self.x[i * self.dim + c])?;
                for u in &self.u_levels {
                    write!(w, ",{}", u[i * self.dim + c])?;
                }
                writeln!(w)?;
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

/// Solve the system by explicit Euler from the path's base level.
pub fn euler_system_solve(path: &MultiLevelPath, drift: &DriftSpec) -> SolutionPath {
    let n_pts = path.n_points();
    let d = path.dim();
    let dt = path.grid().dt();
    let floor = path.hurst().integer_part();
    let base = path.level(0);

    // U¹ = B^{H̄} exactly; U^{j+1} by Euler on U^j
    let mut u_levels: Vec<Vec<f64>> = Vec::with_capacity(floor);
    if floor >= 1 {
        u_levels.push(base.to_vec());
        for _ in 2..=floor {
            let prev = u_levels.last().unwrap();
            let mut cur = vec![0.0; n_pts * d];
            for i in 1..n_pts {
                for c in 0..d {
                    cur[i * d + c] = cur[(i - 1) * d + c] + dt * prev[(i - 1) * d + c];
                }
            }
            u_levels.push(cur);
        }
    }

    let mut x = vec![0.0; n_pts * d];
    let mut bx = vec![0.0; d];
    if floor == 0 {
        for i in 1..n_pts {
            let (head, tail) = x.split_at_mut(i * d);
            drift.eval_into(&head[(i - 1) * d..], &mut bx);
            for c in 0..d {
                tail[c] = head[(i - 1) * d + c]
                    + dt * bx[c]
                    + (base[i * d + c] - base[(i - 1) * d + c]);
            }
        }
    } else {
        let top_u = u_levels.last().unwrap().clone();
        for i in 1..n_pts {
            let (head, tail) = x.split_at_mut(i * d);
            drift.eval_into(&head[(i - 1) * d..], &mut bx);
            for c in 0..d {
                tail[c] = head[(i - 1) * d + c] + dt * (bx[c] + top_u[(i - 1) * d + c]);
            }
        }
    }

    SolutionPath { grid: path.grid().clone(), dim: d, x, u_levels }
}

/// Max over levels of the oscillation (max − min per component, maximized).
pub fn path_oscillation(path: &MultiLevelPath) -> f64 {
    let d = path.dim();
    let mut worst = 0.0_f64;
    for k in 0..path.n_levels() {
        let vals = path.level(k);
        for c in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..path.n_points() {
                let v = vals[i * d + c];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            worst = worst.max(hi - lo);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::hurst::validate_hurst;
    use crate::noise::gen_base_fbm_exact;
    use crate::rng::RngSeed;

    fn lifted_fbm(h: f64, n: usize, seed: u64) -> MultiLevelPath {
        let h = validate_hurst(h).unwrap();
        gen_base_fbm_exact(h.base(), TimeGrid::unit(n), 1, RngSeed::new(seed, 0), false)
            .unwrap()
            .lift(h)
            .unwrap()
    }

    #[test]
    fn zero_drift_system_matches_lift() {
        for h in [1.5, 2.3] {
            let path = lifted_fbm(h, 1024, 7);
            let sol = euler_system_solve(&path, &DriftSpec::zero(1));
            let tol = 2.0 * path.grid().dt() * path_oscillation(&path);
            let max_err = sol
                .x
                .iter()
                .zip(path.top())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(max_err <= tol, "H={h}: system vs lift {max_err} > {tol}");
        }
    }

    #[test]
    fn constant_drift_adds_linear_ramp() {
        let path = lifted_fbm(1.5, 1024, 8);
        let sol = euler_system_solve(&path, &DriftSpec::constant(1, 2.0));
        let tol = 2.0 * path.grid().dt() * (path_oscillation(&path) + 2.0);
        for (i, &t) in path.grid().points().iter().enumerate() {
            let expect = 2.0 * t + path.top()[i];
            assert!((sol.x[i] - expect).abs() <= tol, "X_t = c·t + B^H_t at t={t}");
        }
    }

    #[test]
    fn brownian_case_noise_added_exactly() {
        let path = lifted_fbm(0.7, 256, 9);
        let sol = euler_system_solve(&path, &DriftSpec::zero(1));
        assert!(sol.u_levels.is_empty());
        for (a, b) in sol.x.iter().zip(path.top()) {
            assert!((a - b).abs() < 1e-15, "with b≡0 and ⌊H⌋=0, X ≡ B^H");
        }
    }

    #[test]
    fn csv_header_shape() {
        let path = lifted_fbm(2.3, 8, 1);
        let sol = euler_system_solve(&path, &DriftSpec::zero(1));
        let csv = sol.to_csv_string();
        assert!(csv.starts_with("t,component,x,u1,u2\n"));
        assert_eq!(csv.lines().count(), 1 + 9);

        let flat = lifted_fbm(0.7, 4, 1);
        let sol = euler_system_solve(&flat, &DriftSpec::zero(1));
        assert!(sol.to_csv_string().starts_with("t,component,x\n"));
    }
}
