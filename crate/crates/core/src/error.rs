use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("small-angle rotation is singular for degenerate frequencies (lambda = 1)")]
    DegenerateFrequencies,

    #[error("normal mode {mode} is unstable (squared frequency {omega_sq:.6e} <= 0)")]
    UnstableMode { mode: u8, omega_sq: f64 },

    #[error("quadratic form is not positive definite (a11 = {a11}, det = {det})")]
    NotPositiveDefinite { a11: f64, det: f64 },

    #[error("Gaussian moment of total degree {0} is not supported (max 4)")]
    UnsupportedDegree(usize),

    #[error("Gaussian moments require a zero linear part")]
    NonZeroLinearPart,

    #[error("closed-form overlap exists only for levels 0 and 1, got index {0}")]
    IndexOutOfRange(usize),

    #[error("quadrature order {0} is below the minimum of 16")]
    QuadratureOrderTooLow(usize),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a perfect square")]
    NotAProductDimension(usize),

    #[error("deformation parameter q must be positive, got {0}")]
    NonPositiveQ(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
