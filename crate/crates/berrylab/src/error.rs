//! Crate-wide error type.
//!
//! Errors are split by what the caller can do about them: `Config` means the
//! request itself is malformed (CLI exit code 2), `Accuracy` means a
//! quadrature failed to reach its target and reports what it did achieve,
//! and the remaining variants surface domain, resource and I/O failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or arguments (bad energy, wave count, grid...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometric precondition violated (unchained segments, degenerate rect...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Normalization undefined for the requested energy.
    #[error("normalization error: {0}")]
    Normalization(String),

    /// The request would exceed a hard resource guard.
    #[error("resource error: {0}")]
    Resource(String),

    /// A quadrature did not converge to its target tolerance.
    #[error("accuracy error: {context} (achieved {achieved:.3e}, target {target:.3e})")]
    Accuracy {
        context: String,
        achieved: f64,
        target: f64,
    },

    /// A statistical diagnostic could not be computed.
    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: config errors exit 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
