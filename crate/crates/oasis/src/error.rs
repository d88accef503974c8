//! Crate-wide error type.

use thiserror::Error;

/// Unified error for everything that can go wrong in this crate: data parsing,
/// configuration, numerical failures, and optimizer-level aborts.
#[derive(Debug, Error)]
pub enum OasisError {
    /// A data file could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration file or CLI flag was invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Mismatched dimensions between two objects that must agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The adaptive step-size rule had no finite candidate (both the growth cap
    /// and the curvature ratio were infinite). The caller should fall back to
    /// the previous step size.
    #[error("adaptive step size has no finite candidate (stationary pair of iterates)")]
    NoFiniteStepSize,

    /// Backtracking line search could not find an acceptable step.
    #[error("line search failed: {0}")]
    LineSearch(String),

    /// An iterative numerical routine did not converge within its budget.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A run produced a non-finite iterate and was aborted.
    #[error("run aborted at iteration {iteration}: {message}")]
    Aborted { iteration: usize, message: String },

    /// A theory check was asked to run on an objective it does not apply to.
    #[error("check not applicable: {0}")]
    NotApplicable(String),

    /// Wrapped I/O error.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, OasisError>;
