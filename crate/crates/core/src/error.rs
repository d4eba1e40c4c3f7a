use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("non-physical Bloch vector of length {0}")]
    NonPhysicalBloch(f64),
    #[error("operation supports only dimension 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("map is not completely positive (eigenvalue {eigenvalue:e})")]
    NotCompletelyPositive { eigenvalue: f64 },
    #[error("preparation `{label}` has zero probability ({probability:e})")]
    ZeroProbability { label: String, probability: f64 },
    #[error("input states are linearly dependent (rank {rank} of {required})")]
    LinearDependence { rank: usize, required: usize },
    #[error("input state is incompatible with the correlated state (min eigenvalue {0:e})")]
    Incompatible(f64),
    #[error("probe input lies outside the span of the family inputs (residual {0:e})")]
    OutsideSpan(f64),
    #[error("pin target must be pure (purity {0})")]
    MixedPinTarget(f64),
    #[error("projective preparation must be a rank-1 projector (residual {0:e})")]
    NotRankOneProjector(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("preparation not supported here: {0}")]
    UnsupportedPreparation(String),
    #[error("projection design matrix is degenerate (rank {0})")]
    ProtocolDegenerate(usize),
    #[error("prediction needs a pure preparation (Bloch length {0})")]
    MixedPreparation(f64),
    #[error("record is missing rows: {0}")]
    MissingRows(String),
    #[error("record row {row} has no output")]
    MissingOutput { row: usize },
    #[error("unknown scenario `{name}`; available: {}", catalog.join(", "))]
    UnknownScenario { name: String, catalog: Vec<String> },
    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
