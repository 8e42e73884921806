use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} exceeds the supported maximum of 8")]
    DimensionOverflow(usize),
    #[error("unsupported dimension {0} (expected 1, 2, 4 or 8)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has {found} entries, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("matrix is too close to singular (smallest singular value {0:.3e})")]
    IllConditioned(f64),
    #[error("matrix is not unitary (max deviation of U^dagger U from I is {0:.3e})")]
    NotUnitary(f64),
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("invalid qubit indices: {0}")]
    InvalidQubits(String),
    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),
    #[error("channel is not trace preserving (max deviation of sum E^dagger E from I is {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid measurement record: {0}")]
    InvalidRecord(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("objective is not finite at the starting point")]
    NonFiniteObjective,
    #[error("failed to parse reference data: {0}")]
    Reference(String),
}
