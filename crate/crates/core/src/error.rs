use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A power or log of a non-positive quantity was requested.
    #[error("domain error in {family}: {message}")]
    Domain { family: &'static str, message: String },

    /// An evaluation produced a non-finite value (overflow, 0^negative, ...).
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A law spec violates its structural invariants.
    #[error("invalid law spec: {0}")]
    Spec(String),

    /// A cost model is inconsistent or was applied to an invalid point.
    #[error("invalid cost: {0}")]
    Cost(String),

    /// An instance file or recipe failed validation.
    #[error("invalid instance: {0}")]
    Instance(String),

    /// Fitting could not produce a usable result.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Posterior estimation could not produce a usable mixture.
    #[error("posterior estimation failed: {0}")]
    Posterior(String),

    /// Report aggregation was asked to combine incompatible logs.
    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
