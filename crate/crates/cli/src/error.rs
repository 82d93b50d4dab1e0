use std::fmt;

use topic_privacy::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters (exit 1).
    Usage(String),
    /// Unreadable or invalid input data (exit 2).
    Data(String),
    /// Anything else, including failures to write outputs (exit 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            Error::UnknownToken(_)
            | Error::Parse { .. }
            | Error::DimensionMismatch { .. }
            | Error::EmptyCorpus(_)
            | Error::EmptyDocument(_)
            | Error::InsufficientShadows { .. }
            | Error::EmptyPrivateVocabulary
            | Error::SingleClass
            | Error::SampleSize(_)
            | Error::ZeroRange
            | Error::Io(_) => CliError::Data(e.to_string()),
        }
    }
}
