use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which half of a shadow ensemble a document's statistics come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    In,
    Out,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::In => f.write_str("in"),
            Side::Out => f.write_str("out"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown token `{0}` is not in the vocabulary")]
    UnknownToken(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("corpus has no usable data: {0}")]
    EmptyCorpus(String),

    #[error("document {0} is empty")]
    EmptyDocument(usize),

    #[error("document {doc_id}: only {available} shadow models on the {side} side (need at least 2)")]
    InsufficientShadows {
        doc_id: usize,
        side: Side,
        available: usize,
    },

    #[error("empty private vocabulary: DP set union released no words")]
    EmptyPrivateVocabulary,

    #[error("scores contain a single class; ROC needs both members and non-members")]
    SingleClass,

    #[error("sample of size {0} is outside the supported range 3..=5000")]
    SampleSize(usize),

    #[error("sample has zero range")]
    ZeroRange,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
