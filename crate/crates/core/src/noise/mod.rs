//! Fractional Brownian motion in the extended scale: generators, the
//! iterated-integral lift, conditional structure, seminorms and stopping times.

mod exact;
mod holder;
mod mvn;
mod path;

pub use exact::{ExactFbmGenerator, MAX_EXACT_GRID, gen_base_fbm_exact, mvn_variance_constant};
pub use holder::{
    DerivativeSource, EXHAUSTIVE_LIMIT, PairScheme, RunningHolderNorm, SeminormEstimate,
    holder_decompose, holder_seminorm, holder_seminorm_from_derivative, stopping_time_tau_k,
    stopping_time_tau_k_with_scheme,
};
pub use mvn::{
    ConditionalMean, MvnSimulation, conditional_remainder_exact, gen_mvn_fbm,
    remainder_discrete_variance, remainder_weights,
};
pub use path::{MultiLevelPath, NoiseError};
