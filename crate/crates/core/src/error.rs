use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty file: no candle rows")]
    EmptyFile,

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("{reason} at line {line}")]
    InvalidCandle { line: u64, reason: String },

    #[error("duplicate timestamp {timestamp} at line {line}")]
    DuplicateTimestamp { line: u64, timestamp: i64 },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("cannot resample {from} data to the finer {to} interval")]
    FinerInterval { from: String, to: String },

    #[error("series is empty")]
    EmptySeries,

    #[error("pivot threshold {0} is outside (0, 1)")]
    ThresholdOutOfRange(f64),

    #[error("expected {expected} waves, got {got}")]
    WaveCount { expected: String, got: usize },

    #[error("malformed wave directions: {0}")]
    MalformedDirections(String),

    #[error("zero-length wave between indices {start} and {end}")]
    ZeroLengthWave { start: usize, end: usize },

    #[error("invalid search config: {0}")]
    InvalidConfig(String),

    #[error("pivots do not belong to this series: {0}")]
    PivotMismatch(String),

    #[error("no patterns supplied")]
    EmptyMatches,

    #[error("need {needed} candles after index {issued_at}, only {available} available")]
    InsufficientFuture {
        issued_at: usize,
        needed: usize,
        available: usize,
    },

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("index {index} out of range for series of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("narrator failed: {0}")]
    Narrator(String),
}
