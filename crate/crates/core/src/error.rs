use thiserror::Error;

/// Errors raised by the library and surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the set on which an operation is defined.
    #[error("{0}")]
    Domain(String),

    /// More than one eigenfrequency fell inside a wave-package window.
    #[error("gap violation at s = {center}: modes {indices:?} all lie within {width} of s")]
    GapViolation { center: f64, width: f64, indices: Vec<i64> },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Profile(String),

    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable category, used as the prefix of CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::GapViolation { .. } => "gap-violation",
            Error::Config(_) => "config",
            Error::Profile(_) => "profile",
            Error::Input(_) => "input",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
