//! Mixing times, cutoff diagnostics and product chains for finite
//! continuous-time Markov chains.
//!
//! - [`chain`]: generators, stationary laws, transient laws, spectral gaps.
//! - [`metrics`]: total variation, separation, Hellinger and pairwise distances.
//! - [`product`]: n-fold product chains.
//! - [`mixing`]: mixing times and cutoff ratios.
//! - [`family`]: the `G_n` family, whose products mix without cutoff.
//! - [`suite`]: batch checks of the comparison inequalities.

pub mod chain;
pub mod cli;
pub mod error;
pub mod family;
pub mod metrics;
pub mod mixing;
pub mod product;
pub mod suite;

pub use error::{Error, Result};
