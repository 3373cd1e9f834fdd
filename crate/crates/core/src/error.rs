//! Error type shared by every stage of the grading pipeline.

use std::io;
use std::path::Path;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a dataset and writing a report.
///
/// Variants are grouped by the stage that raises them; the CLI maps every
/// variant to exit code 1 (argument errors are caught earlier by the parser
/// and exit 2).
#[derive(Debug, Error)]
pub enum Error {
    // -- dataset ingestion --
    #[error("file not found: {path}")]
    MissingFile { path: String },
    #[error("invalid CSV header: expected `id,question,answer,score`, found `{found}`")]
    InvalidHeader { found: String },
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("invalid score `{value}` at line {line}: expected an integer in 0..={max_marks}")]
    InvalidScore {
        line: u64,
        value: String,
        max_marks: u32,
    },
    #[error("duplicate record id `{id}` at line {line}")]
    DuplicateId { line: u64, id: String },
    #[error("dataset contains no records")]
    EmptyDataset,
    #[error("split ratio must lie strictly between 0 and 1, got {ratio}")]
    InvalidRatio { ratio: f64 },
    #[error("invalid synthetic spec: {reason}")]
    InvalidSpec { reason: String },

    // -- text preparation --
    #[error("no token survived vocabulary construction")]
    EmptyCorpus,
    #[error("token `{token}` is not in the vocabulary")]
    UnknownToken { token: String },

    // -- numeric stages --
    #[error("vocabulary has {len} token(s); at least 2 are required")]
    VocabularyTooSmall { len: usize },
    #[error("invalid parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("domain error: {reason}")]
    DomainError { reason: String },
    #[error("cannot form {k} clusters from {points} points")]
    TooManyClusters { k: usize, points: usize },
    #[error("training set is empty")]
    EmptyTraining,
    #[error("non-finite value in {context}")]
    NonFiniteInput { context: &'static str },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    // -- evaluation --
    #[error("score {score} is outside 0..={max_marks}")]
    OutOfRangeScore { score: u32, max_marks: u32 },
    #[error("empty input")]
    EmptyInput,
    #[error("duplicate model `{name}` in comparison")]
    DuplicateModel { name: String },

    // -- persistence --
    #[error("model file, line {line}: {reason}")]
    ModelFormat { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps an IO error from opening `path`, turning "not found" into the
    /// dedicated variant so diagnostics always name the missing file.
    pub fn open(path: &Path, err: io::Error) -> Error {
        if err.kind() == io::ErrorKind::NotFound {
            Error::MissingFile {
                path: path.display().to_string(),
            }
        } else {
            Error::Io(err)
        }
    }

    /// Shorthand for a [`Error::ModelFormat`] parse failure.
    pub(crate) fn model(line: u64, reason: impl Into<String>) -> Error {
        Error::ModelFormat {
            line,
            reason: reason.into(),
        }
    }
}
