//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The requested transition is not dipole-allowed for the given port.
    #[error("transition {transition} is not driven by port {port}")]
    InvalidTransition {
        transition: String,
        port: crate::Port,
    },

    /// On-resonance reflectance cannot reach zero in the under-coupled
    /// regime, so no magic amplitude exists.
    #[error("no magic amplitude: mode is not over-coupled (gamma = {gamma:e}, gamma_2 = {gamma2:e} rad/s)")]
    Undercoupled { gamma: f64, gamma2: f64 },

    /// Division by zero in a closed form (zero coupling or zero detuning).
    #[error("{context} requires {quantity} != 0")]
    ZeroDivision {
        context: &'static str,
        quantity: &'static str,
    },

    /// The adaptive integrator could not meet its tolerance.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A linear solve hit an (effectively) singular matrix.
    #[error("singular matrix in {0}")]
    Singular(&'static str),

    /// Not enough data to constrain the requested fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The fit did not converge within its iteration cap.
    #[error("fit did not converge after {iterations} iterations (residual {residual:e})")]
    FitDiverged { iterations: usize, residual: f64 },
}
