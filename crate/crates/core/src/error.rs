use thiserror::Error;

/// Errors raised across configuration, sensing and recovery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CassError {
    #[error("dimension n = {0} must be a positive power of two")]
    DimensionNotPowerOfTwo(usize),
    #[error("sparsity k = {0} must be a positive power of two")]
    SparsityNotPowerOfTwo(usize),
    #[error("sparsity k = {k} exceeds dimension n = {n}")]
    SparsityExceedsDimension { n: usize, k: usize },
    #[error("sensing energy must be positive and finite, got {0}")]
    InvalidEnergy(f64),
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("amplitude must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("dyadic interval (scale {scale}, location {location}) is invalid for n = {n}")]
    InvalidInterval { scale: u32, location: usize, n: usize },
    #[error("cannot bisect intervals at the finest scale {0}")]
    BisectAtFinestScale(u32),
    #[error("budget exceeded: spent {spent} + charge {charge} > budget {budget}")]
    BudgetExceeded { budget: f64, spent: f64, charge: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("need at least {needed} measurements to select from, got {available}")]
    TooFewMeasurements { needed: usize, available: usize },
    #[error("least-squares fit on the selected columns is singular")]
    SingularFit,
    #[error("k = {k} out of range for {len} coefficients")]
    TermCountOutOfRange { k: usize, len: usize },
    #[error("length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),
    #[error("requested {requested} levels but at most {max} are available")]
    TooManyLevels { requested: usize, max: usize },
    #[error("cannot aggregate an empty list of trial reports")]
    EmptyReports,
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CassError>;

impl From<std::io::Error> for CassError {
    fn from(err: std::io::Error) -> Self {
        CassError::Io(err.to_string())
    }
}
