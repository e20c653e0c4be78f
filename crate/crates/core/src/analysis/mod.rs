//! Error functions between full and shadow solutions, rate regression, and
//! the truncated error system.

mod errors;
mod rate;
mod truncation;

pub use errors::{error_series, ErrorSeries};
pub use rate::{horizon, rate_fit, RateFit};
pub use truncation::{
    cutoff_rho, cutoff_theta, fit_remainder_constant, removal_check, sample_remainder, simulate_linearized,
    simulate_truncated, truncated_remainder, Remainder, RemainderContext, RemainderSample, RemovalReport,
    TruncatedState, TruncatedTrajectory, TruncationConfig,
};

use crate::fullsolve::SolverError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("trajectories disagree: {0}")]
    AxisMismatch(&'static str),
    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-positive value in rate fit: epsilon {epsilon}, error {error}")]
    NonPositive { epsilon: f64, error: f64 },
    #[error("epsilon {0} appears more than once")]
    DuplicateEpsilon(f64),
    #[error("delta0 must lie in (0, 1/2], got {0}")]
    BadDelta(f64),
    #[error("cut-off radius L must be positive, got {0}")]
    BadRadius(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
