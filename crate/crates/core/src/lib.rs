//! Numerical laboratory for fractional Brownian motion in the extended scale
//! `H ∈ (0,∞)∖ℤ`.
//!
//! The crate has four layers:
//!
//! * [`noise`] — exact-covariance and Mandelbrot–van Ness generators for the
//!   base process, iterated-integral lifts to `H > 1`, the exact conditional
//!   structure (conditional means and remainders), Hölder seminorms and the
//!   stopping times that localize everything.
//! * [`sewing`] — regular partitions, the refinement map used in the sewing
//!   construction, Riemann sums of two-parameter germs, dyadic convergence
//!   with rate extrapolation, and moment-rate probes.
//! * [`solver`] — the stopped Picard map for drifts that are merely Hölder,
//!   the degenerate-system Euler scheme, condition predicates, and the
//!   order-`k` conditional Taylor operators.
//! * [`experiments`] — seeded, reproducible Monte Carlo harnesses that turn
//!   the quantitative statements (variance identities, semigroup identity,
//!   expansion rates, contraction ratios) into measured slopes and residuals.

pub mod drift;
pub mod experiments;
pub mod grid;
pub mod hurst;
pub mod noise;
pub mod parallel;
pub mod quad;
pub mod rate;
pub mod report;
pub mod rng;
pub mod sewing;
pub mod solver;

pub use grid::TimeGrid;
pub use hurst::{Hurst, c_of_h, validate_hurst};
pub use rate::{RateEstimate, loglog_fit};
pub use rng::RngSeed;
