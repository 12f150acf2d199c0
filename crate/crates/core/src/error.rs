use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace} instead of 1")]
    TraceNotOne { trace: f64 },

    #[error("eigenvalue {value:e} is below the positivity tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("basis is not orthonormal (max |G - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("support violation: {weight:e} of the state lies outside the reference support")]
    SupportViolation { weight: f64 },

    #[error("operator is not supported on qubits {subset:?} (deviation {deviation:e})")]
    OperatorSupport { subset: Vec<usize>, deviation: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("RK4 step halving did not converge (last endpoint shift {shift:e} at dt = {dt:e})")]
    Convergence { shift: f64, dt: f64 },

    #[error("invariant violated at t = {time}: {source}")]
    InvariantViolation {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined entropy flow: excluded probability mass {mass:e}")]
    UndefinedEntropyFlow { mass: f64 },

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
