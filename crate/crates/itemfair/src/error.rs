use thiserror::Error;

/// Errors produced by validation, parsing, normalization, and enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input violated its format; `origin` names the file (or other
    /// source) and `line` is 1-based.
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    /// An in-memory input violated a structural invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Min-max normalization is impossible because the most-fair and
    /// most-unfair achievable scores coincide for this (k, m, n) shape.
    #[error("degenerate normalization: most-fair and most-unfair bounds coincide ({context})")]
    DegenerateNormalization { context: String },

    /// The pairwise coverage-disparity measure has no similar pair to
    /// average over.
    #[error("no similar pairs among recommended items; the disparity measure is undefined")]
    NoSimilarPairs,

    /// Rank correlation is undefined, e.g. because one score list is
    /// entirely tied.
    #[error("rank correlation undefined: {0}")]
    CorrelationUndefined(String),

    /// The requested brute-force enumeration would evaluate more runs than
    /// the configured cap allows.
    #[error("enumeration space of {size} runs exceeds the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },
}

impl Error {
    pub(crate) fn parse(origin: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            origin: origin.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub(crate) fn degenerate(context: impl Into<String>) -> Self {
        Error::DegenerateNormalization {
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
