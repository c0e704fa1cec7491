//! Conditional Taylor operators: the noise polynomial `𝔹^H_{s,t}` and the
//! order-`k` expansion maps `𝔸^{(k)}` built on a chain of Picard iterates.
//!
//! Everything here reads only time-`s` data of the path and the chain, so the
//! output is measurable with respect to the information available at `s`.

use super::picard::PicardState;
use super::SolverError;
use crate::drift::DriftSpec;
use crate::noise::MultiLevelPath;

/// `𝔹^H_{s,t} = Σ_{i≤⌊H⌋} (t−s)^i/i! · ∂^i B^H_s` from the stored levels.
pub fn noise_taylor(path: &MultiLevelPath, s: f64, t: f64) -> Result<Vec<f64>, SolverError> {
    let grid = path.grid();
    let s_idx = grid.index_of(s).ok_or(SolverError::OffGrid)?;
    if grid.index_of(t).is_none() {
        return Err(SolverError::OffGrid);
    }
    assert!(t >= s, "need s ≤ t");
    Ok(noise_taylor_at(path, s_idx, t - s))
}

fn noise_taylor_at(path: &MultiLevelPath, s_idx: usize, dt: f64) -> Vec<f64> {
    let d = path.dim();
    let floor = path.hurst().integer_part();
    let mut out = vec![0.0; d];
    let mut coeff = 1.0; // (t−s)^i / i!
    for i in 0..=floor {
        let deriv = path.value(floor - i, s_idx);
        for c in 0..d {
            out[c] += coeff * deriv[c];
        }
        coeff *= dt / (i + 1) as f64;
    }
    out
}

/// The expansion operator `𝔸^{(k)}` together with its ψ-chain:
/// `chain[0] = ψ¹` with `φ = 𝒯_K(ψ¹)`, `chain[j] = ψ^{j+1} = ` the iterate
/// one application earlier, down to the depth the order requires.
pub struct ExpansionOperator<'a> {
    pub order: usize,
    pub chain: Vec<&'a PicardState>,
}

impl<'a> ExpansionOperator<'a> {
    pub fn new(order: usize, chain: Vec<&'a PicardState>) -> Self {
        Self { order, chain }
    }
}

/// Evaluate `𝔸^{(k)}_{s,t}φ` by the inductive quadrature
/// `𝔸^{(j)}ψ = ψ_s + ∫_s^t b(𝔸^{(j−1)}ψ' + 𝔹^H_{s,r}) dr`.
pub fn expansion_apply(
    op: &ExpansionOperator,
    phi: &PicardState,
    path: &MultiLevelPath,
    drift: &DriftSpec,
    s: f64,
    t: f64,
) -> Result<Vec<f64>, SolverError> {
    let grid = path.grid();
    let s_idx = grid.index_of(s).ok_or(SolverError::OffGrid)?;
    let t_idx = grid.index_of(t).ok_or(SolverError::OffGrid)?;
    assert!(t_idx >= s_idx, "need s ≤ t");
    if op.chain.len() < op.order {
        return Err(SolverError::ChainTooShallow);
    }
    let d = path.dim();
    let dt = grid.dt();
    let m = t_idx - s_idx;

    if op.order == 0 {
        return Ok(phi.value(s_idx).to_vec());
    }

    // 𝔹^H_{s,r} for every r on [s,t]
    let taylor: Vec<f64> = (0..=m)
        .flat_map(|row| noise_taylor_at(path, s_idx, row as f64 * dt))
        .collect();

    // level 0: the deepest ψ frozen at s
    let deepest = op.chain[op.order - 1];
    let mut level: Vec<f64> = (0..=m).flat_map(|_| deepest.value(s_idx).to_vec()).collect();

    let mut arg = vec![0.0; d];
    let mut out = vec![0.0; d];
    for j in 1..=op.order {
        // anchor is ψ^{k−j}_s, with ψ⁰ ≡ φ
        let anchor: &[f64] = if j == op.order {
            phi.value(s_idx)
        } else {
            op.chain[op.order - j - 1].value(s_idx)
        };
        let mut integrand = vec![0.0; (m + 1) * d];
        for row in 0..=m {
            for c in 0..d {
                arg[c] = level[row * d + c] + taylor[row * d + c];
            }
            drift.eval_into(&arg, &mut out);
            integrand[row * d..(row + 1) * d].copy_from_slice(&out);
        }
        let mut next = vec![0.0; (m + 1) * d];
        next[..d].copy_from_slice(anchor);
        for row in 1..=m {
            for c in 0..d {
                next[row * d + c] = next[(row - 1) * d + c]
                    + 0.5 * dt * (integrand[(row - 1) * d + c] + integrand[row * d + c]);
            }
        }
        level = next;
    }
    Ok(level[m * d..].to_vec())
}
