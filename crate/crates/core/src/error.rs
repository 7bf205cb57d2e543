//! Error type shared across the pipeline.

use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// Variants split into two families: *input* errors (bad files, bad schemas,
/// bad configuration) and *compute* errors (a numerically valid request that
/// cannot be satisfied by the data). [`Error::exit_code`] maps the family to
/// the CLI exit-code contract (2 for input, 3 for compute).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid RR schedule: {0}")]
    InvalidSchedule(String),

    #[error("unsupported sampling rate {0} Hz (minimum 100 Hz)")]
    UnsupportedRate(f64),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("unknown emotion label {0:?}")]
    Label(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no beats detected")]
    NoBeatsDetected,

    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("RR span {span_s:.1} s is below the required {required_s:.0} s")]
    InsufficientSpan { span_s: f64, required_s: f64 },

    #[error("cannot fit scaler on an empty training set")]
    EmptyFit,

    #[error("cannot train on an empty dataset")]
    EmptyTrain,

    #[error("scores became non-finite during boosting (learning rate too high?)")]
    NonFiniteGradient,

    #[error("k = {k} exceeds the {n_train} training rows")]
    InvalidK { k: usize, n_train: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("k = {k} folds exceeds the {groups} distinct groups")]
    TooManyFolds { k: usize, groups: usize },

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperParam(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it came from.
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// CLI exit code: 0 is success (never returned here), 2 an input/schema
    /// problem, 3 a compute problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSchedule(_)
            | Error::UnsupportedRate(_)
            | Error::Io { .. }
            | Error::Format(_)
            | Error::Label(_)
            | Error::Schema(_)
            | Error::Parse(_)
            | Error::Config(_)
            | Error::InvalidHyperParam(_)
            | Error::EmptyGrid => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
