use thiserror::Error;

/// Errors raised by the workbench operations.
///
/// Variants carrying indices name the offending points (or point tuples) so
/// that callers can report the exact witness of a violated invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("non-finite or NaN entry in {what} at index {index}")]
    NonFiniteEntry { what: &'static str, index: usize },

    #[error("dist[{i}][{i}] = {value} but the diagonal must be zero")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("dist[{i}][{j}] = {value} but distinct points must be at positive distance")]
    NonPositiveDistance { i: usize, j: usize, value: f64 },

    #[error("asymmetric metric: dist[{i}][{j}] = {dij} but dist[{j}][{i}] = {dji}")]
    AsymmetricMetric { i: usize, j: usize, dij: f64, dji: f64 },

    #[error("triangle inequality violated for ({i},{j},{k}): d(i,k) = {dik} > d(i,j) + d(j,k) = {via}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        dik: f64,
        via: f64,
    },

    #[error("negative weight {value} at point {i}")]
    NegativeWeight { i: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1 within 1e-9")]
    WeightSumMismatch { sum: f64 },

    #[error("empty space: at least one point is required")]
    EmptySpace,

    #[error("index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("the point set is empty")]
    EmptySet,

    #[error("product space with {points} points exceeds the cap of {cap}")]
    TooLarge { points: usize, cap: usize },

    #[error("function is infinite at point {index}")]
    InfiniteValueAtPoint { index: usize },

    #[error("function takes the value -inf at point {index}, which this operation rejects")]
    NegativeInfinity { index: usize },

    #[error("function is +inf at every point")]
    AllInfinite,

    #[error("function is -inf at every point")]
    AllNegInfinite,

    #[error("function is constant on the support of the measure")]
    ConstantFunction,

    #[error("lambda must be positive, got {0}")]
    NonpositiveLambda(f64),

    #[error("median undefined: mass of {{f = +inf}} is {mass} >= 1/2")]
    TooMuchInfinity { mass: f64 },

    #[error("profile computed at n = {profile_n} cannot certify a function on n = {function_n}")]
    ProfileDimensionMismatch { profile_n: usize, function_n: usize },

    #[error("gamma = {gamma} outside the admissible interval ({lower}, 1)")]
    GammaOutOfRange { gamma: f64, lower: f64 },

    #[error("measures live on spaces of different sizes ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("right derivative must be negative, got {0}")]
    NonnegativeDerivative(f64),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
