use thiserror::Error;

/// Errors raised across metric ingestion, sampling and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance table is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance table is empty")]
    EmptyMetric,
    #[error("non-finite distance at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("non-zero self distance at point {i}: {value}")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("asymmetric distances: d({i},{j}) = {dij} but d({j},{i}) = {dji}")]
    Asymmetry { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("negative distance d({i},{j}) = {value}")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("distinct points {i} and {j} are at distance zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {via}")]
    TriangleViolation { i: usize, j: usize, k: usize, direct: f64, via: f64 },
    #[error("invalid edge #{index} ({u}, {v}, {w}): {reason}")]
    InvalidEdge { index: usize, u: usize, v: usize, w: f64, reason: &'static str },
    #[error("graph is disconnected: no path between {u} and {v}")]
    DisconnectedGraph { u: usize, v: usize },
    #[error("terminal set is empty")]
    EmptyTerminalSet,
    #[error("terminal {0} listed more than once")]
    DuplicateTerminal(usize),
    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point {0} is not a terminal")]
    NotATerminal(usize),
    #[error("graph generation failed: {0}")]
    GenerationFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("K = {0} is below the minimum of 3")]
    InvalidK(usize),
    #[error("rate vector has {got} entries for {expected} terminals")]
    RateLengthMismatch { expected: usize, got: usize },
    #[error("interval [{a}, {a}+{b}] is outside the support [0, {gamma}]")]
    DomainError { a: f64, b: f64, gamma: f64 },
    #[error("conditioning event nu >= {a} is empty for gamma = {gamma}")]
    DegenerateCondition { a: f64, gamma: f64 },
    #[error("critical threshold needs at least two terminals")]
    SingleTerminal,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("no pair survives the exclusion rules (zero distance or zero terminal distance)")]
    NoValidPairs,
    #[error("radius {r} exceeds A_u/4 = {limit} at point {u}")]
    RadiusTooLarge { u: usize, r: f64, limit: f64 },
    #[error("exact oracle supports at most 3 terminals, got {0}")]
    TooManyTerminals(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
