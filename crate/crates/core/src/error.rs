use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading or validating data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-binary label {value} at line {line}")]
    NonBinaryLabel { value: f64, line: usize },
    #[error("no rows")]
    NoRows,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("feature width mismatch: expected {expected} columns, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Errors from the metric functions.
#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("metric requires at least one positive label")]
    NoPositives,
    #[error("metric requires both positive and negative labels")]
    SingleClass,
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("need at least {bins} records for {bins} bins, got {n}")]
    TooFewRecords { n: usize, bins: usize },
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
}

/// Errors raised during model fitting or prediction.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrain,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("labels incompatible with loss: {0}")]
    LabelMismatch(String),
    #[error("stop metric failed on validation data: {0}")]
    StopMetric(#[source] MetricError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Errors from configuration, persistence and the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("archive error: {0}")]
    Archive(String),
    #[error("archive checksum mismatch (expected {expected}, computed {computed})")]
    Checksum { expected: String, computed: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Archive(_) | Error::Checksum { .. } | Error::Io { .. } => 2,
            Error::Metric(_) => 2,
            Error::Train(TrainError::Data(_)) => 2,
            Error::Train(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
