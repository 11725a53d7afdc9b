use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("matrix is not Hermitian (‖A − A†‖_F = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("initial block at site {site} has trace {trace:.3e}")]
    ZeroBlock { site: usize, trace: f64 },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid vertex coordinate {coord} for tree order {k}")]
    InvalidVertex { coord: u32, k: usize },

    #[error("tree order must be at least 1")]
    InvalidOrder,

    #[error("state is not block diagonal in the lattice factor (off-diagonal mass {residual:.3e})")]
    NotBlockDiagonal { residual: f64 },

    #[error("transition expectation takes {expected} factors, got {actual}")]
    WrongFactorCount { expected: usize, actual: usize },

    #[error("dimension {dim} exceeds the dense oracle limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("boundary enumeration needs {required} combinations, cap is {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("h is not a boundary condition (residual {residual:.3e})")]
    NotBoundary { residual: f64 },

    #[error("Tr(ω h) = {trace:.3e} cannot be normalized")]
    NotNormalizable { trace: f64 },

    #[error("observable support depth {depth} exceeds cap {cap}")]
    DepthExceeded { depth: usize, cap: usize },

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}
