use thiserror::Error;

use crate::minimax::GameSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size cap exceeded for {what}: {value} > {limit}")]
    SizeCap {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid code: {0}")]
    InvalidQrac(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("argument outside its domain: {0}")]
    DomainError(String),

    #[error("bad subsystem split: {0}")]
    BadSplit(String),

    #[error("outcome labels do not match {{0,1}}^{n}: {detail}")]
    LabelMismatch { n: usize, detail: String },

    #[error("shift {d} is not in 1..={n}")]
    BadShift { d: usize, n: usize },

    #[error("the full 2^n outcome table was not materialized")]
    MissingFullTable,

    #[error(
        "minimax solver did not reach the target after {} iterations (best worst-case value {:.6}, gap {:.3e})",
        .0.iterations, .0.worst_x_value, .0.gap
    )]
    NotConverged(Box<GameSolution>),

    #[error("no bad-event-free sample set after {attempts} attempts (best worst margin {worst_margin:.6})")]
    DerandomizationFailed { attempts: usize, worst_margin: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
