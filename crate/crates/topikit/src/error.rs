use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the toolkit.
///
/// `Validation` and `Parse` indicate bad inputs (the CLI exits with code 2
/// for these); everything else is an internal or environmental failure
/// (exit code 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("validation error: {0}")]
    Validation(String),

    /// An input file could not be parsed.
    #[error("parse error in {path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A persisted artifact has the wrong magic or an unsupported version.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than internal failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Parse { .. })
    }
}
