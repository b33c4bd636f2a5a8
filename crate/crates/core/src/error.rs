use std::path::PathBuf;

use thiserror::Error;

use crate::velocity::ArcChordReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} rejected: must be even and at least 16")]
    InvalidGrid(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("curve is not a graph: d(z1)/d(alpha) <= 0 at {} node(s)", .nodes.len())]
    NotAGraph { nodes: Vec<usize> },

    #[error(
        "arc-chord failure: denominator {:.3e} at nodes ({}, {})",
        .0.min_denominator, .0.pair.0, .0.pair.1
    )]
    ArcChordFailure(ArcChordReport),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("quadrature did not converge: estimated error {error:.3e} after {intervals} intervals")]
    QuadratureNotConverged { error: f64, intervals: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Failures of the numerics rather than of the input or the environment.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ArcChordFailure(_) | Error::NonFinite(_) | Error::QuadratureNotConverged { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
