use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource bound exceeded: {0}")]
    Resource(String),

    #[error("cache I/O error on {path}: {source}")]
    CacheIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),

    #[error("cache covers |d| < {have} but {need} was requested")]
    BoundMismatch { have: u64, need: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
