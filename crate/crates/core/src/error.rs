use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: expected {expected} intervals, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("index out of range: {index} > {max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("`{key}` = {value} is outside the admissible range {range}")]
    OutOfRange {
        key: &'static str,
        value: String,
        range: &'static str,
    },

    #[error("exact Hölder scan requested for N = {0} > 4096 intervals")]
    ExactScanTooLarge(usize),

    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),

    #[error("mesh {mesh} is finer than the grid spacing 1/{n}")]
    MeshTooFine { mesh: f64, n: usize },

    #[error("mesh {mesh} is not a divisor-compatible multiple of 1/{n}")]
    MeshMismatch { mesh: f64, n: usize },

    #[error("non-finite state at node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("covariance factorization failed at step {step}: {detail}")]
    Factorization { step: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
