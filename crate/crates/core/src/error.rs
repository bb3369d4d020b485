use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve has no points")]
    Empty,
    #[error("curve has {0} points, the limit is 64")]
    TooManyPoints(usize),
    #[error("point {index} is not finite")]
    NonFinite { index: usize },
    #[error("point {index} has negative price {price}")]
    NegativePrice { index: usize, price: f64 },
    #[error("point {index}: prices must be strictly increasing")]
    PricesNotIncreasing { index: usize },
    #[error("point {index}: quantity increases with price")]
    Increasing { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid price bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("clearing tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("unknown good {0}")]
    UnknownGood(usize),
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
    #[error("agent {agent} subscribes to unknown good {good}")]
    DanglingSubscription { agent: String, good: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("price of good {good} is {price}; demand is unbounded")]
    NonPositivePrice { good: usize, price: f64 },
    #[error("weights must be positive and sum to one")]
    BadWeights,
    #[error("CES elasticity must be positive and different from one, got {0}")]
    BadElasticity(f64),
    #[error("bundle dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("constant-returns technology (a = 0) has no interior optimum; use an arbitrageur")]
    ConstantReturns,
    #[error("cost coefficients must be nonnegative")]
    NegativeCost,
    #[error("sampled bid for good {good} is not monotone in price")]
    NonMonotone { good: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("link {from}->{to} is a self-loop")]
    SelfLoop { from: u32, to: u32 },
    #[error("link {from}->{to} references an unknown location")]
    UnknownLocation { from: u32, to: u32 },
    #[error("link {from}->{to} appears twice")]
    DuplicateLink { from: u32, to: u32 },
    #[error("link {from}->{to} has invalid cost coefficients (a = {a}, b = {b})")]
    BadCost { from: u32, to: u32, a: f64, b: f64 },
    #[error("requirement {origin}->{destination} has no path")]
    Unreachable { origin: u32, destination: u32 },
    #[error("requirement {origin}->{destination} has invalid amount {amount}")]
    BadRequirement {
        origin: u32,
        destination: u32,
        amount: f64,
    },
    #[error("negative flow {0}")]
    NegativeFlow(f64),
}

/// Configuration-file failures; always carry the offending line.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("invalid network: {0}")]
    Network(#[from] TransportError),
    #[error("invalid economy: {0}")]
    Economy(String),
}
