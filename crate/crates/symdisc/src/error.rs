//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition (non-finite value, modulus
    /// out of range, dimension mismatch, ...).
    #[error("input outside domain: {0}")]
    Domain(String),

    /// The simultaneous root iteration hit its iteration cap before every
    /// residual met the backward-error contract.
    #[error("root solver did not converge within {iterations} iterations (worst residual {residual:.3e})")]
    NonConvergent { iterations: usize, residual: f64 },

    /// A rational map denominator fell below the pole guard.
    #[error("pole in rational map ({context}): |denominator| = {denominator:.3e}")]
    Pole { denominator: f64, context: String },

    /// A two-point or direction bound was requested at a point that is not a
    /// member of the domain.
    #[error("point is not inside G_{n} (root margin {margin:.6e})")]
    NotMember { n: usize, margin: f64 },

    /// An upper-bound search exhausted its budget without producing a single
    /// validated certificate.
    #[error("disc search failed: {0}")]
    Search(String),

    /// The sign convention of a flat embedding could not be identified.
    #[error("embedding detection failed: {0}")]
    Embedding(String),

    /// Command-line / file input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
