use thiserror::Error;

use crate::modelspace::ModelKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Coincident or zero-length configuration where a direction or angle is needed.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// More than one minimal segment (e.g. antipodal points on the sphere).
    #[error("ambiguous segment: {0}")]
    Ambiguous(String),

    /// An iterative solver did not reach its tolerance; `best` is the best value found.
    #[error("numerical failure: {msg} (best value {best})")]
    Numerical { msg: String, best: f64 },

    #[error("operation not supported on {0}")]
    UnsupportedKind(ModelKind),

    /// A sampling or discretisation resolution was too coarse to answer.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A scan could not be set up (e.g. no strainer found at a sample point).
    #[error("setup error: {0}")]
    Setup(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(GeomError::Domain(msg.into()))
}
