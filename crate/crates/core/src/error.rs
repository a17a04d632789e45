use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: input contains a non-finite entry")]
    NonFinite { op: &'static str },

    #[error("{op}: dimension mismatch ({detail})")]
    Dimension { op: &'static str, detail: String },

    #[error("{op}: invalid argument ({detail})")]
    InvalidArgument { op: &'static str, detail: String },

    #[error("{op}: matrix is not Hermitian positive definite")]
    NotPositiveDefinite { op: &'static str },

    #[error("{op}: matrix is rank deficient (min/max singular value ratio {ratio:e})")]
    RankDeficient { op: &'static str, ratio: f64 },

    #[error("config key `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dump format error: {0}")]
    Format(String),
}

/// Coarse machine-readable error classes, used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ErrorCategory {
    Numeric = 2,
    Dimension = 3,
    Argument = 4,
    Config = 5,
    Io = 6,
    Format = 7,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Numeric => "numeric",
            ErrorCategory::Dimension => "dimension",
            ErrorCategory::Argument => "argument",
            ErrorCategory::Config => "config",
            ErrorCategory::Io => "io",
            ErrorCategory::Format => "format",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::NonFinite { .. } | Error::NotPositiveDefinite { .. } | Error::RankDeficient { .. } => {
                ErrorCategory::Numeric
            }
            Error::Dimension { .. } => ErrorCategory::Dimension,
            Error::InvalidArgument { .. } => ErrorCategory::Argument,
            Error::Config { .. } | Error::ConfigParse(_) => ErrorCategory::Config,
            Error::Io(_) => ErrorCategory::Io,
            Error::Json(_) | Error::Format(_) => ErrorCategory::Format,
        }
    }

    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension { op, detail: detail.into() }
    }

    pub(crate) fn arg(op: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidArgument { op, detail: detail.into() }
    }

    pub(crate) fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config { key: key.into(), detail: detail.into() }
    }
}
