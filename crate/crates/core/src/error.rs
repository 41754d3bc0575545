use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A system or experiment parameter violates its invariant.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// A function argument is out of its domain.
    #[error("invalid argument `{arg}`: {reason}")]
    Argument { arg: &'static str, reason: String },

    /// The assignment shape does not match the scheme being evaluated.
    #[error("scheme mismatch: {0}")]
    Scheme(String),

    /// The requested experiment would exceed the memory budget.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn arg(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::Argument {
            arg,
            reason: reason.into(),
        }
    }

    /// Short category label used for process exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config { .. } | Error::Argument { .. } | Error::Scheme(_) => "config",
            Error::Resource(_) => "resource",
            Error::Io { .. } | Error::Serialize(_) => "io",
        }
    }
}
