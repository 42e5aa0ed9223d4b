//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("communication budget too small: B = {budget} bits but d*log2(mn) = {required:.3}")]
    BudgetTooSmall { budget: u64, required: f64 },

    #[error("mn = {mn} too small; the protocol constants need mn >= 4")]
    MnTooSmall { mn: u64 },

    #[error(
        "sub-signal layout overflow at level {level}: needs {needed} bits but only {available} fit \
         (deltaScale too aggressive for this budget)"
    )]
    SubSignalOverflow { level: u32, needed: u64, available: u64 },

    #[error("refusing to build a level-{t} grid in dimension {d}: {points} grid points exceed the cap")]
    GridTooFine { t: u32, d: usize, points: u128 },

    #[error("malformed bitstring: {0}")]
    MalformedSignal(String),

    #[error("ERM did not converge: projected gradient norm {grad_norm:.3e} > tol {tol:.3e} after {iters} iterations")]
    ErmNonConvergence { grad_norm: f64, tol: f64, iters: usize },

    #[error("invalid distribution parameter: {0}")]
    InvalidDistribution(String),

    #[error("unknown estimator id {0:?}")]
    UnknownEstimator(String),

    #[error("unknown distribution id {0:?}")]
    UnknownDistribution(String),

    #[error("estimator {estimator} expects the {expected} domain convention but the distribution uses {actual}")]
    DomainMismatch { estimator: String, expected: String, actual: String },

    #[error("signal length mismatch: expected {expected} bits, got {actual}")]
    SignalLength { expected: u64, actual: u64 },

    #[error(
        "bit budget violated by machine {machine}: payload {payload} bits > stated budget {budget} bits"
    )]
    BudgetViolation { machine: u64, payload: u64, budget: u64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
