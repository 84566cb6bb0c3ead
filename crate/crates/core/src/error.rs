use thiserror::Error;

/// Errors raised by the spectral sensitivity routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: defect {defect:e} exceeds tolerance {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (relative off-diagonal mass {residual:e})"
    )]
    Convergence { sweeps: usize, residual: f64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("eigenvalue list is not non-increasing at position {position}")]
    NonMonotone { position: usize },

    #[error("direction must have unit Euclidean norm, got {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("a matrix family needs at least one parameter")]
    NoParameters,

    #[error("point lies outside the family domain at coordinate {coordinate}")]
    OutOfDomain { coordinate: usize },

    #[error("singular value {sigma:e} is within the floor {floor:e} of zero")]
    SigmaAtZero { sigma: f64, floor: f64 },

    #[error("singular value cluster reaches into the zero block of the embedding (index {hi} > {q})")]
    ClusterIntoZeroBlock { hi: usize, q: usize },

    #[error("non-finite value in finite-difference evaluation at step {step:e}")]
    NonFiniteEvaluation { step: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable identifier used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::NonFinite { .. } => "non_finite",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::Convergence { .. } => "convergence",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::NonMonotone { .. } => "non_monotone",
            Error::NonUnitDirection { .. } => "non_unit_direction",
            Error::NoParameters => "no_parameters",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::SigmaAtZero { .. } => "sigma_at_zero",
            Error::ClusterIntoZeroBlock { .. } => "cluster_into_zero_block",
            Error::NonFiniteEvaluation { .. } => "non_finite_evaluation",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
