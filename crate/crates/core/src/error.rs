use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit string lengths differ: {left} vs {right}")]
    LengthMismatch { left: u32, right: u32 },

    #[error("string length {0} out of range: k ∈ [1,64]")]
    InvalidLength(u32),

    #[error("radius {radius} out of range: radius ∈ [0,{k}]")]
    RadiusOutOfRange { radius: u32, k: u32 },

    #[error("invalid bit string {0:?}: expected 1 to 64 characters of '0'/'1'")]
    InvalidBitString(String),

    #[error("invalid {field} = {value}: {bound}")]
    Validation {
        field: &'static str,
        value: String,
        bound: &'static str,
    },

    #[error("cannot parse {key} = {value:?}: {expected}")]
    Parse {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),

    #[error("malformed config line {line}: {text:?} (expected key=value)")]
    Syntax { line: usize, text: String },

    #[error("capacity bound is infinite for producer_cost = 0")]
    InfiniteBound,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
