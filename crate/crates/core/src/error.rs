use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} has zero norm")]
    ZeroNormVector(&'static str),

    #[error("row {0} has zero norm")]
    ZeroNormRow(usize),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("budget {budget} exceeds the {pool} available frames")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sweep cell (policy={policy}, K={budget}, B={batch}, video={video}): {source}")]
    Cell {
        policy: String,
        budget: usize,
        batch: String,
        video: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Problems with an embedding file's contents.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: not an .npy file and not a JSON array")]
    BadMagic,

    #[error("unsupported .npy format version {major}.{minor}")]
    UnsupportedVersion { major: u8, minor: u8 },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported dtype '{0}', expected little-endian float32 ('<f4')")]
    UnsupportedDtype(String),

    #[error("fortran-ordered arrays are not supported")]
    FortranOrder,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("{extra} trailing bytes after payload")]
    TrailingData { extra: usize },

    #[error("invalid JSON array: {0}")]
    Json(String),
}
