use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("operator trace {0} is not 1")]
    NotNormalized(f64),

    #[error("layout with total dimension {expected} does not match operator dimension {found}")]
    LayoutMismatch { expected: usize, found: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("subsystem index {index} out of range for a {parties}-party layout")]
    IndexOutOfRange { index: usize, parties: usize },

    #[error("support violation: weight {0:e} lies outside the reference support")]
    SupportViolation(f64),

    #[error("invalid free-set model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rejection sampling exceeded {0} attempts")]
    SamplingCap(usize),

    #[error("degenerate operation: output trace {0:e}")]
    DegenerateOperation(f64),

    #[error("oracle did not converge (residual {residual:e}); partial bracket [{lower}, {upper}]")]
    OracleFailure { residual: f64, lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
