use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("vertex index {0} is not part of the network")]
    UnknownVertex(usize),

    #[error("edge {edge} has residual {available} toward the requested direction, needed {needed}")]
    InsufficientResidual {
        edge: usize,
        available: u64,
        needed: u64,
    },

    #[error("configurations belong to different networks")]
    NetworkMismatch,

    #[error("invalid node bound [{lo}, {hi}] for vertex of degree {degree}")]
    InvalidBounds { lo: u64, hi: u64, degree: u64 },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("start score {score} of vertex {vertex} exceeds its cap {cap}")]
    CapExceeded { vertex: usize, score: u64, cap: u64 },

    #[error("predicate does not hold at the supplied configuration")]
    PredicateViolated,

    #[error("{what} budget of {budget} exhausted")]
    BudgetExceeded { what: &'static str, budget: u64 },

    #[error("network is not a tree: {0}")]
    NotATree(String),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("score {score} is not attainable (valid range 0..={max})")]
    InfeasibleScore { score: u64, max: u64 },

    #[error("requested redundancy {r} at vertex {vertex} exceeds floor of edge expansion {h_floor}")]
    ExpansionViolated { vertex: usize, r: u64, h_floor: u64 },

    #[error("normalized redundancies sum to an odd total")]
    OddTotal,

    #[error("vertex {vertex} admits no integer score: redundancy 0 with odd degree {degree}")]
    EmptyWindow { vertex: usize, degree: u64 },

    #[error("no target score assignment in the requested windows is realizable")]
    UnrealizableScores,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pair was not simulated (zero recorded attempts)")]
    PairNotSimulated,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
