use thiserror::Error;

use crate::bkw::TableStats;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("ring parameter mismatch: (n={left_n}, q={left_q}) vs (n={right_n}, q={right_q})")]
    ParamMismatch {
        left_n: usize,
        left_q: u64,
        right_n: usize,
        right_q: u64,
    },

    #[error("element is not invertible (shares a factor with x^n+1)")]
    NotInvertible,

    #[error("element is not supported on the subring exponents")]
    NotSubringSupported,

    #[error("sample is not in the coset a0*S_q")]
    NotInCoset,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sample source exhausted after {} inputs", stats.inputs)]
    SourceExhausted { stats: Box<TableStats> },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("no candidate survived hypothesis testing for subproblem j={j}")]
    NoSurvivor { j: usize },

    #[error("hypothesis test for subproblem j={j} did not single out a candidate")]
    NonUnique { j: usize },

    #[error("reduction starved: {got} reduced samples, need {need}")]
    Starved { got: usize, need: usize },

    #[error("holdout verification failed on {failed} of {total} fresh samples")]
    HoldoutFailed { failed: usize, total: usize },

    #[error("draw budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
