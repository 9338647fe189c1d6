use thiserror::Error;

/// Errors raised by game construction, attribution and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("player count {0} outside 1..={max}", max = crate::game::MAX_PLAYERS)]
    PlayerCount(usize),
    #[error("output dimension {0} outside 1..={max}", max = crate::game::MAX_OUTPUTS)]
    OutputDim(usize),
    #[error("coalition mask {mask:#b} out of range for n={n}")]
    MaskOutOfRange { mask: u64, n: usize },
    #[error("duplicate coalition mask {0:#b}")]
    DuplicateMask(u32),
    #[error("empty coalition must have zero value")]
    EmptyCoalitionValue,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("unanimity game requires nonempty T")]
    EmptyUnanimity,
    #[error("output index {k} out of range for m={m}")]
    OutputIndex { k: usize, m: usize },
    #[error("player index {i} out of range for n={n}")]
    PlayerIndex { i: usize, n: usize },
    #[error("coalition size {s} out of range for n={n}")]
    CoalitionSize { s: usize, n: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("permutation oracle capped at n={max}, got n={0}", max = crate::shapley::PERMUTATION_MAX_PLAYERS)]
    PermutationCap(usize),
    #[error("{what} capped at n={max}, got n={n}")]
    PlayerCap { what: &'static str, max: usize, n: usize },
    #[error("expected a scalar game (m=1), got m={0}")]
    NotScalar(usize),
    #[error("covariance is not symmetric: |sigma[{i}][{j}] - sigma[{j}][{i}]| too large")]
    NotSymmetric { i: usize, j: usize },
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("singular conditional block for coalition {0:#b}")]
    SingularBlock(u32),
    #[error("covariance has nonzero off-diagonal entries: use correlated path")]
    UseCorrelatedPath,
    #[error("background sample is empty")]
    EmptyBackground,
    #[error("need at least {need} background rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("undefined cosine for zero vector")]
    ZeroVector,
    #[error("undefined correlation for constant vector")]
    ConstantVector,
    #[error("empty run list")]
    EmptyRuns,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
