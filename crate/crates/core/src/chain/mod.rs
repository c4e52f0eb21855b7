//! Continuous-time Markov chains: generators, stationary laws, transient laws,
//! hitting-time survival and spectral gaps.

mod dist;
mod io;
mod random;
mod spec;
mod spectral;
mod stationary;
mod uniformize;

pub use dist::ProbDist;
pub use random::random_reversible_chain;
pub use spec::ChainSpec;
pub use spectral::{spectral_gap, symmetrized_spectrum};
pub use stationary::{
    check_detailed_balance, stationarity_residual, stationary_distribution, BalanceCheck,
    StationaryMode, CYCLE_TOL, LN_RATE_FLOOR,
};
pub use uniformize::{
    advance_rows, evolve_distribution, survival_probability, transient_distribution,
    transient_distribution_capped, transient_matrix, SurvivalCurve, DEFAULT_LT_CAP,
};
