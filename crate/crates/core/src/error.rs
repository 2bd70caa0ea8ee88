use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("schema error at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("non-finite value at `{field}`")]
    NonFinite { field: String },

    #[error("dimension mismatch at `{field}`: expected {expected}, found {found}")]
    Dimension {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("A not nilpotent of degree 2 (‖A²‖_F = {norm:e})")]
    NotNilpotent { norm: f64 },

    #[error("Riccati iteration did not converge after {iterations} iterations (last step {step:e})")]
    DareNotConverged { iterations: usize, step: f64 },

    #[error("B̃ᵀXB̃ is numerically singular; X lost positive definiteness")]
    DareSingular,

    #[error("PI form requires D = I (d_{index} = {value})")]
    PiRequiresIdentityD { index: usize, value: f64 },
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::DareNotConverged { .. } | Error::DareSingular)
    }

    /// True for I/O and file-format failures.
    pub fn is_io_or_parse(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse(_)
                | Error::Schema { .. }
                | Error::NonFinite { .. }
                | Error::Dimension { .. }
        )
    }
}
