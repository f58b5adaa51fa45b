use std::io;

/// Errors produced anywhere in the extraction toolchain.
///
/// Each variant maps onto one process exit code (see [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller passed arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Dimensions, seeds or run configuration are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data is malformed.
    #[error("format error at byte offset {offset}: {reason}")]
    Format { offset: u64, reason: String },

    /// The entropy budget cannot support any output at the requested security level.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Input has no variance (correlation of a constant sequence).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 usage, 2 configuration, 3 data format, 4 infeasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Degenerate(_) => 1,
            Error::Config(_) => 2,
            Error::Format { .. } | Error::Io(_) => 3,
            Error::Infeasible(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
