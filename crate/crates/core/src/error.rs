use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("blank word: image contains no ink")]
    BlankWord,

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {message}")]
    ImageCodec { path: PathBuf, message: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid corpus entry on line {line}: {word:?} contains whitespace")]
    InvalidWord { line: usize, word: String },

    #[error("glyph error: font {font} has no glyph for {ch:?}")]
    Glyph { ch: char, font: String },

    #[error("font error: {0}")]
    Font(String),

    #[error("unknown character {0:?} for this alphabet")]
    UnknownChar(char),

    #[error("unknown label {label} (alphabet has {size} characters)")]
    UnknownLabel { label: usize, size: usize },

    #[error("too few samples to split: {0} (need at least 5)")]
    TooFewSamples(usize),

    #[error("sample {word:?} is too narrow: {width} columns for a label path needing {required}")]
    SampleTooNarrow {
        word: String,
        width: usize,
        required: usize,
    },

    #[error("numeric overflow at step {step}")]
    NumericOverflow { step: usize },

    #[error("non-finite parameter update: {0}")]
    NonFiniteUpdate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible label length: {frames} frames cannot emit a labelling that needs {required}")]
    InfeasibleLabelLength { frames: usize, required: usize },

    #[error("label {label} out of range for {classes} classes (blank = 0 is not a valid target)")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("zero-length target at sample {0}")]
    ZeroLengthTarget(usize),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0} experiment cells failed")]
    CellsFailed(usize),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end:
    /// 1 usage/config, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::NumericOverflow { .. } | Error::NonFiniteUpdate(_) => 3,
            _ => 2,
        }
    }
}
