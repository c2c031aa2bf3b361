//! Error types shared across the crate.

use thiserror::Error;

/// Configuration problems, surfaced before any program execution happens.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("empty problem type set")]
    EmptyTypeSet,
    #[error("unknown type tag `{0}`")]
    UnknownTypeTag(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("initial active size {requested} exceeds training set size {available}")]
    InitialActiveTooLarge { requested: usize, available: usize },
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl ConfigError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Failures while reading serialized genomes or dataset files.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unknown instruction `{0}`")]
    UnknownInstruction(String),
    #[error("bad literal `{0}`: {1}")]
    BadLiteral(String, String),
    #[error("unterminated quoted token `{0}`")]
    UnterminatedQuote(String),
    #[error("bad escape sequence in `{0}`")]
    BadEscape(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<ParseError>,
    },
    #[error("missing dataset header line")]
    MissingHeader,
    #[error("malformed record: {0}")]
    MalformedRecord(String),
}
