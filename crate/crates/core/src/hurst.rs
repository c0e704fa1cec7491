//! The Hurst parameter and its closed-form variance constant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance band around integers: floating input this close to an integer is
/// rejected rather than silently nudged.
pub const NON_INTEGER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HurstError {
    #[error("Hurst parameter must be positive and finite")]
    NonPositive,
    #[error("Hurst parameter must not be an integer (within {NON_INTEGER_TOL:e})")]
    NonIntegerRequired,
}

/// A validated Hurst parameter `H ∈ (0,∞)∖ℤ`, split into integer and
/// fractional parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hurst {
    value: f64,
    integer_part: usize,
    fractional_part: f64,
}

/// Validate `h` and split it into `⌊H⌋` and `H − ⌊H⌋`.
pub fn validate_hurst(h: f64) -> Result<Hurst, HurstError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(HurstError::NonPositive);
    }
    if (h - h.round()).abs() <= NON_INTEGER_TOL {
        return Err(HurstError::NonIntegerRequired);
    }
    let floor = h.floor();
    Ok(Hurst {
        value: h,
        integer_part: floor as usize,
        fractional_part: h - floor,
    })
}

impl Hurst {
    pub fn new(h: f64) -> Result<Self, HurstError> {
        validate_hurst(h)
    }

    pub fn value(self) -> f64 {
        self.value
    }

    /// `⌊H⌋`: the number of iterated time-integrals on top of the base process.
    pub fn integer_part(self) -> usize {
        self.integer_part
    }

    /// `H − ⌊H⌋ ∈ (0,1)`: the Hurst parameter of the base process.
    pub fn fractional_part(self) -> f64 {
        self.fractional_part
    }

    /// The base-process parameter as its own validated `Hurst`.
    pub fn base(self) -> Hurst {
        Hurst {
            value: self.fractional_part,
            integer_part: 0,
            fractional_part: self.fractional_part,
        }
    }

    pub fn is_base(self) -> bool {
        self.integer_part == 0
    }
}

/// `∏_{i=1}^{⌊H⌋} (H − i + 1/2)` — the denominator of the conditional
/// remainder kernel `(t−r)^{H−1/2} / ∏`. Empty product for `H < 1`.
pub fn kernel_denominator(h: Hurst) -> f64 {
    let mut p = 1.0;
    for i in 1..=h.integer_part() {
        p *= h.value() - i as f64 + 0.5;
    }
    p
}

/// The variance constant `c(H)` in
/// `E|B^H_t − E^s B^H_t|² = d·c(H)|t−s|^{2H}`:
/// `c(H) = 1/(2H) · (1/∏_{i=1}^{⌊H⌋}(H−i+1/2))²`.
pub fn c_of_h(h: Hurst) -> f64 {
    let p = kernel_denominator(h);
    1.0 / (2.0 * h.value()) / (p * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_integers_and_nonpositive() {
        assert_eq!(validate_hurst(2.0).unwrap_err(), HurstError::NonIntegerRequired);
        assert_eq!(validate_hurst(1.0 + 5e-10).unwrap_err(), HurstError::NonIntegerRequired);
        assert_eq!(validate_hurst(0.0).unwrap_err(), HurstError::NonPositive);
        assert_eq!(validate_hurst(-0.5).unwrap_err(), HurstError::NonPositive);
        assert_eq!(validate_hurst(f64::NAN).unwrap_err(), HurstError::NonPositive);
    }

    #[test]
    fn splits_parts() {
        let h = validate_hurst(0.5).unwrap();
        assert_eq!(h.integer_part(), 0);
        assert_eq!(h.fractional_part(), 0.5);

        let h = validate_hurst(2.25).unwrap();
        assert_eq!(h.integer_part(), 2);
        assert_eq!(h.fractional_part(), 0.25);
        assert_eq!(h.value(), 2.25);
    }

    #[test]
    fn c_of_h_closed_form() {
        // H = 1/2: Brownian case, empty product.
        assert!((c_of_h(Hurst::new(0.5).unwrap()) - 1.0).abs() < 1e-15);
        // H = 3/2: product = (1.5 − 1 + 0.5) = 1, c = 1/3.
        assert!((c_of_h(Hurst::new(1.5).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        // H = 9/4: product = 1.75 · 0.75, c = 1/(4.5 · 1.3125²).
        let expect = 1.0 / (4.5 * 1.3125 * 1.3125);
        assert!((c_of_h(Hurst::new(2.25).unwrap()) - expect).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn parts_recompose(h in 0.01f64..6.0) {
            prop_assume!((h - h.round()).abs() > 1e-6);
            let p = validate_hurst(h).unwrap();
            // floor subtraction is exact, so the parts recompose exactly
            prop_assert_eq!(p.integer_part() as f64 + p.fractional_part(), p.value());
            prop_assert!(p.fractional_part() > 0.0 && p.fractional_part() < 1.0);
        }
    }
}
