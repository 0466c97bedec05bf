use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lrmf_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("line {line}: expected {expected} entries, found {actual}")]
    RaggedRow { line: usize, expected: usize, actual: usize },

    #[error("line {line}: {field:?} is not a nonnegative integer")]
    BadEntry { line: usize, field: String },

    #[error("input holds no data")]
    EmptyInput,

    #[error("pgm: {0}")]
    Pgm(String),

    #[error("image has {levels} gray levels, more than p={p}; pass --bucket to bin them")]
    TooManyLevels { levels: usize, p: u32 },

    #[error("{0}")]
    Flags(String),

    #[error("internal check failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
