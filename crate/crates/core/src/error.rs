use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (sym part is nonzero)")]
    NotSkew,
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inner product is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("operator is zero")]
    ZeroOperator,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("vector is not orthogonal to the harmonic fields (relative projection {0:.3e})")]
    NotOrthogonalToHarmonics(f64),
    #[error("invalid potential operator: residual {0:.3e}")]
    InvalidPotential(f64),
    #[error("wrong cardinality: expected {expected} vectors, got {got}")]
    WrongCardinality { expected: usize, got: usize },
    #[error("degree too low: {0}")]
    DegreeTooLow(String),
    #[error("field is not representable in the target space: {0}")]
    NotRepresentable(String),
    #[error("complex property violated: {0}")]
    ComplexProperty(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
