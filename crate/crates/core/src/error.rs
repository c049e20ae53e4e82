use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coefficient {index} is negative ({value})")]
    NegativeCoefficient { index: usize, value: f64 },

    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },

    #[error("all coefficients are zero")]
    ZeroVector,

    #[error("coefficients are not unit-normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("outcome label {label} out of range for dimension {d}")]
    LabelOutOfRange { label: usize, d: usize },

    #[error("phase offset is not finite")]
    NonFiniteOffset,

    #[error("probability {value} at ({a},{b},{k},{l}) is negative beyond rounding")]
    NegativeProbability {
        a: usize,
        b: usize,
        k: usize,
        l: usize,
        value: f64,
    },

    #[error("probability block ({a},{b}) sums to {sum}, expected 1")]
    UnnormalizedBlock { a: usize, b: usize, sum: f64 },

    #[error("correlation functional has imaginary residue {0}")]
    NonHermitianSpectrum(f64),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("argument {argument} lies within {threshold} of a pole")]
    PoleProximity { argument: f64, threshold: f64 },

    #[error("setting block ({a},{b}) has no shots")]
    EmptyBlock { a: usize, b: usize },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("budget {budget} too small, need at least {min}")]
    BudgetTooSmall { budget: usize, min: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("extended precision arithmetic failed: {0}")]
    Precision(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
