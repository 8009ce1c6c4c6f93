use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Every variant carries enough context to tell which invariant broke and by
/// how much, so callers can decide whether the configuration or the input is
/// at fault.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hermitian: max |m - m^dagger| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary: max |U U^dagger - 1| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("trace {trace} is outside 1 +/- {tolerance:e}")]
    TraceOutOfTolerance { trace: f64, tolerance: f64 },

    #[error("matrix is not positive: minimum eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("jump probabilities out of state {source_state} sum to {total}, leaving no survival amplitude (reduce dt)")]
    SurvivalUnderflow { source_state: usize, total: f64 },

    #[error("chi = {0} is outside [0, 1]")]
    ChiOutOfRange(f64),

    #[error("invalid model specification: {0}")]
    SpecInvalid(String),

    #[error("time {requested} fs is outside the trajectory span [0, {end}] fs")]
    TimeOutOfRange { requested: f64, end: f64 },

    #[error("index {index} is out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("circuit layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("state became invalid at step {step}: {reason}")]
    StateInvalid { step: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
