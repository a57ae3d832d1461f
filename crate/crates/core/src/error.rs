use std::path::PathBuf;

use crate::model::{PartId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point {index} ({x}, {y}, {z}) lies outside the canonical cube")]
    OutsideCube {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
    },

    #[error("joint axis has norm {0}, expected unit length")]
    NonUnitAxis(f64),

    #[error("zero-length vector")]
    ZeroVector,

    #[error("joint value {value} outside limits [{lower}, {upper}]")]
    OutOfLimits { value: f64, lower: f64, upper: f64 },

    #[error("no state value for part {0}")]
    MissingState(PartId),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("missing loss component `{0}`")]
    MissingComponent(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by numerically or geometrically degenerate input
    /// rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::OutsideCube { .. })
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
