use std::path::PathBuf;

/// Errors produced by loading, validation, fitting, and sampling.
///
/// `Io`, `Parse`, and `Invalid` describe problems with inputs (bad files,
/// malformed data, arguments out of range); `Sampler` describes a run that
/// started from valid inputs but could not finish, such as a rejection loop
/// that stalls. The CLI maps the first group to exit code 2 and the second
/// to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("sampling failed: {0}")]
    Sampler(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn sampler(msg: impl Into<String>) -> Self {
        Error::Sampler(msg.into())
    }

    /// True for errors that indicate bad input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Sampler(_))
    }
}
