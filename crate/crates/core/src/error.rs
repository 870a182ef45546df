use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input must be strictly positive, got {0}")]
    NonPositiveInput(f64),
    #[error("parameter out of range: {0}")]
    NonPositiveParameter(String),
    #[error("insufficient precision: {detail} (required bits: {required_bits})")]
    PrecisionInsufficient { required_bits: u64, detail: String },
    #[error("reflector vector is zero")]
    ZeroReflectorVector,
    #[error("matrix is not upper Hessenberg: entry ({row}, {col}) is nonzero")]
    NotHessenberg { row: usize, col: usize },
    #[error("empty shift list")]
    EmptyShiftList,
    #[error("shift is an exact eigenvalue: zero pivot at step {step}")]
    SingularEncounter { step: usize },
    #[error("precondition violated: {0}")]
    RequiresViolation(String),
    #[error("decoupling did not converge within {steps} steps")]
    DecoupleBudgetExceeded { steps: usize },
    #[error("shift search failed {attempts} consecutive times")]
    RetryBudgetExceeded { attempts: usize },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("oracle did not converge: {0}")]
    OracleNonConvergence(String),
    #[error("cardinality mismatch: {0} vs {1}")]
    CardinalityMismatch(usize, usize),
    #[error("matrix is exactly singular")]
    ExactlySingular,
    #[error("grid step {step} is coarser than {limit}")]
    GridTooCoarse { step: f64, limit: f64 },
    #[error("eigenvalues are clustered or defective (gap {0})")]
    DefectiveOrClustered(f64),
    #[error("need at least {needed} eigenvalues, got {got}")]
    TooFewEigenvalues { needed: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

pub type Result<T> = std::result::Result<T, Error>;
