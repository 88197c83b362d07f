//! Error type shared by the simulation and analysis modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Parameter or precondition violation (bad photon order, invalid grid,
    /// empty input, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The gap function had no interior minimum in the search window.
    #[error("no avoided crossing bracketed in window [{0}, {1}] mT")]
    NoCrossing(f64, f64),

    /// Quasienergies kept moving under truncation doubling.
    #[error("quasienergies not converged at truncation {truncation} (tol {tol} rad/us)")]
    TruncationNotConverged { truncation: usize, tol: f64 },

    /// The density matrix did not settle into a periodic steady state.
    #[error("no periodic steady state within {max_periods} drive periods (residual {residual:.3e})")]
    SteadyStateNotPeriodic { max_periods: usize, residual: f64 },

    /// Not enough usable data points for a fit or average.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// No extremum of the requested polarity inside the search window.
    #[error("no {0} found in window [{1}, {2}] mT")]
    NoExtremum(&'static str, f64, f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed spectrum file or metadata.
    #[error("format error: {0}")]
    Format(String),
}
