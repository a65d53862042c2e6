use thiserror::Error;

use crate::book::Side;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BookError {
    #[error("no resting orders on the {} side", .0.as_str())]
    EmptySide(Side),
    #[error("the book is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no samples in the measurement window")]
    EmptyWindow,
    #[error("series of length {len} is too short for lag {lag} (need at least {need})")]
    WindowTooShort { len: usize, lag: usize, need: usize },
    #[error("every window has zero return variance")]
    AllWindowsExcluded,
    #[error("need at least {need} trades, got {got}")]
    TooFewTrades { need: usize, got: usize },
    #[error("need at least {need} points with positive values in range, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("histogram supports do not overlap")]
    DisjointSupports,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Configuration problems. `Invariant` names the violated rule in words.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error: {0}")]
    Syntax(String),
    #[error("invalid `{field}`: {rule}")]
    Invariant { field: String, rule: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl ConfigError {
    pub fn invariant(field: &str, rule: impl Into<String>) -> Self {
        ConfigError::Invariant {
            field: field.to_string(),
            rule: rule.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("replica {replica} (seed {seed}): {source}")]
    Replica {
        replica: usize,
        seed: u64,
        #[source]
        source: Box<RunError>,
    },
    #[error("{context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
    #[error("I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input {path}: {message}")]
    Input { path: String, message: String },
}

impl RunError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn stats(context: impl Into<String>, source: StatsError) -> Self {
        RunError::Stats {
            context: context.into(),
            source,
        }
    }
}
