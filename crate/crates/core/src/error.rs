use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in mode {mode}: expected {expected}, found {found}")]
    ModeMismatch {
        mode: usize,
        expected: usize,
        found: usize,
    },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("expected {expected} values, found {found}")]
    ValueCount { expected: usize, found: usize },

    #[error("non-finite value at coordinate {index:?}")]
    NonFinite { index: Vec<usize> },

    #[error("tensor is not symmetric at coordinate {index:?} (deviation {deviation:.3e})")]
    NotSymmetric { index: Vec<usize>, deviation: f64 },

    #[error("matrix {mode} is not orthogonal (defect {defect:.3e})")]
    NotOrthogonal { mode: usize, defect: f64 },

    #[error("matrix {mode} is not a signed permutation")]
    NotSignedPermutation { mode: usize },

    #[error("retraction input is rank deficient")]
    RankDeficient,

    #[error("singular vector tuples are not orthogonal in mode {mode}")]
    NotOrthogonalTuples { mode: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact arithmetic budget of {0} operations exhausted")]
    BudgetExhausted(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
