use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |L({row},{col}) - L({col},{row})| = {defect:e}")]
    NonSymmetric { row: usize, col: usize, defect: f64 },
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("vertex {vertex} is out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("channel {channel}: {reason}")]
    InvalidChannel { channel: usize, reason: String },
    #[error("channel {channel}: truncation length {requested} is shorter than K0 + 1 = {required}")]
    TruncationTooShort { channel: usize, requested: usize, required: usize },
    #[error("tolerance `{name}` = {value:e} is out of range")]
    ToleranceOutOfRange { name: &'static str, value: f64 },
    #[error("vertex set is not maximal: {beta} has the unique outside neighbour {alpha}")]
    NotMaximal { beta: usize, alpha: usize },
    #[error("cluster rooted at {root} is empty")]
    EmptyCluster { root: usize },
    #[error("λ = {lambda} is within {distance:e} of the eigenvalue {eigenvalue}")]
    AtPole { lambda: num_complex::Complex64, eigenvalue: f64, distance: f64 },
    #[error("group index {index} out of range (there are {groups} groups)")]
    GroupOutOfRange { index: usize, groups: usize },
    #[error("θ must be nonzero")]
    ZeroTheta,
    #[error("channel {channel}: b({index}) = 0")]
    ZeroCoefficient { channel: usize, index: usize },
    #[error("θ = {theta} lies within {distance:e} of the singular point {point}")]
    OnSingularSet {
        theta: num_complex::Complex64,
        point: num_complex::Complex64,
        distance: f64,
    },
    #[error("T(θ) is not invertible at θ = {theta}")]
    TNotInvertible { theta: num_complex::Complex64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("initial data on channel {channel} reaches index {index}, beyond the guarded depth {limit}")]
    SupportTooDeep { channel: usize, index: usize, limit: usize },
    #[error("at least {required} coefficients are needed, got {got}")]
    TooFewCoefficients { required: usize, got: usize },
    #[error("eigenfunction depth {depth} must be at least K0 + 1 = {required}")]
    DepthTooShallow { depth: usize, required: usize },
    #[error("initial data violate the decay bound on channel {channel} at k = {k}")]
    PreconditionViolated { channel: usize, k: usize },
    #[error("{vertex} is not a vertex of the finite part A1 ∪ {{ν(1)}}")]
    InvalidSeed { vertex: String },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}
