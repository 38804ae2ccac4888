use thiserror::Error;

use crate::config::Violation;
use crate::conic::SolveStatus;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("`{field}` has {got} entries, expected {expected}")]
    Length {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("cannot parse power value `{0}` (expected e.g. \"-50 dBm\", \"1e-5 mW\", \"0.1 W\")")]
    Unit(String),
    #[error("config is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{what} index {index} out of range (count {count})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        count: usize,
    },
    #[error("secrecy rate of IR user {user} is {rate}, logarithm undefined")]
    NonPositiveRate { user: usize, rate: f64 },
    #[error("solution shape does not match the channel set: {0}")]
    Shape(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConicError {
    #[error("matrix is not Hermitian (relative defect {0:e})")]
    NotHermitian(f64),
    #[error("malformed cone program: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RecoveryError {
    #[error("matrix is indefinite: min eigenvalue {min:e} below tolerance")]
    Indefinite { min: f64 },
    #[error("matrix has numerical rank {rank}; use Gaussian randomization")]
    NotRankOne { rank: usize },
    #[error("none of the {samples} randomized candidates satisfied the constraints")]
    NoFeasibleCandidate { samples: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ScaError {
    #[error("feasibility initialization failed with solver status {0:?}")]
    InitInfeasible(SolveStatus),
    #[error("invalid options: {0}")]
    Options(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("invalid scenario: {0}")]
    Config(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ZfError {
    #[error("IR user {user} lies in the span of the channels to be nulled")]
    Degenerate { user: usize },
    #[error("T={antennas} too small to null {nulled} channels")]
    TooFewAntennas { antennas: usize, nulled: usize },
    #[error("power allocation failed with solver status {0:?}")]
    Infeasible(SolveStatus),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}
