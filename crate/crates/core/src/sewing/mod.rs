//! The numerical sewing engine: regular partitions, the endpoint-preserving
//! refinement map, Riemann sums of two-parameter germs, dyadic convergence
//! with rate extrapolation, and moment-rate probes.

mod germ;
mod partition;
mod probe;
mod sew;

pub use germ::{Germ, delta_a, riemann_sum, telescoping_check};
pub use partition::{MeshStats, PairSetSpec, Partition, PartitionError};
pub use probe::{
    ConditionalDeltaEstimator, GermFamily, GermProbeReport, NestedConditional, ProbeConfig,
    conditional_rate_probe, germ_rate_probe, moment_rate_probe,
};
pub use sew::{SewError, SewLevel, SewResult, dyadic_sew};
