use thiserror::Error;

/// Errors produced by the graph, geodesy, solver and cover routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported graph family: {0}")]
    UnsupportedFamily(String),

    #[error("vertices {0} and {1} are not connected")]
    NotConnected(usize, usize),

    #[error("invalid cycle at position {position}: {detail}")]
    InvalidCycle { position: usize, detail: String },

    #[error("invalid path at position {position}: {detail}")]
    InvalidPath { position: usize, detail: String },

    #[error("invalid cover, cycle {index}: {detail}")]
    InvalidCover { index: usize, detail: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("search inconclusive: {0}")]
    Inconclusive(String),

    #[error("graph with {n} vertices exceeds the exhaustive limit of {limit}")]
    RefusedTooLarge { n: usize, limit: usize },

    #[error("cover has not passed verification; refusing to derive a bound")]
    UnverifiedCover,
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnsupportedFamily(_) => "unsupported-family",
            Error::NotConnected(..) => "not-connected",
            Error::InvalidCycle { .. } => "invalid-cycle",
            Error::InvalidPath { .. } => "invalid-path",
            Error::InvalidCover { .. } => "invalid-cover",
            Error::Parse { .. } => "parse-error",
            Error::Inconclusive(_) => "inconclusive",
            Error::RefusedTooLarge { .. } => "refused-too-large",
            Error::UnverifiedCover => "unverified-cover",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
