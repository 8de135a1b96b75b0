//! Simulation and verification toolkit for stochastic multi-armed bandits with
//! light-tailed reward distributions.
//!
//! The crate provides four building blocks:
//!
//! * [`arms`]: reward distribution models, their moment-generating functions,
//!   and derivation of light-tail certificates `(u0, zeta)`;
//! * [`policies`]: the UCB1 index policy and its light-tailed extension with
//!   a two-branch confidence radius, plus a uniform-random baseline;
//! * [`concentration`]: a Bernstein-type tail bound for sample means and the
//!   finite-time logarithmic regret bound it implies, with a Monte Carlo
//!   tail-frequency verifier;
//! * [`simulator`]: seeded episode runs and Monte Carlo regret aggregation
//!   with confidence intervals, deterministic regardless of thread count.
//!
//! With the default `parallel` feature the Monte Carlo drivers fan out over a
//! rayon thread pool; without it they run sequentially. Both modes produce
//! bit-identical output for the same seeds.

pub mod arms;
pub mod concentration;
pub mod policies;
pub mod simulator;

/// Errors reported by validation and derivation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor argument violates its documented range.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter {
        /// Name of the offending field or argument.
        field: &'static str,
        /// Human-readable constraint violation.
        reason: String,
    },
    /// An evaluation point lies outside the MGF existence region, or a
    /// requested certificate interval is unavailable for the family.
    #[error("domain error: {0}")]
    Domain(String),
    /// A simulation configuration is internally inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
