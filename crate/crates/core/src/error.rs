use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain is trivial: need at least 2 states, got {0}")]
    TrivialChain(usize),
    #[error("rate graph is not strongly connected (state {0} cannot reach or be reached from state 0)")]
    NonIrreducible(usize),
    #[error("invalid rate at ({from}, {to}): {reason}")]
    InvalidRate {
        from: usize,
        to: usize,
        reason: String,
    },
    #[error("detailed-balance ratios are inconsistent around a cycle (relative deviation {deviation:e})")]
    InconsistentRatios { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("time must be finite and nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("uniformization rate times horizon {0:e} exceeds cap {1:e}")]
    Overflow(f64, f64),
    #[error("start state {0} lies in the absorbing set")]
    StartAbsorbed(usize),
    #[error("absorbing set is empty")]
    EmptyAbsorbingSet,
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("chain is not reversible (symmetrization residual {0:e})")]
    NotReversible(f64),
    #[error("degree {degree} infeasible for {states} states")]
    DegreeInfeasible { states: usize, degree: f64 },
    #[error("reference measure has zero mass at state {0}")]
    ZeroReferenceMass(usize),
    #[error("test function is not mean-zero under pi (mean {0:e})")]
    NotMeanZero(f64),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("tensor product would have {states} states, cap is {cap}")]
    SizeCapExceeded { states: u128, cap: usize },
    #[error("distance at search cap t = {t_hi} is {value}, not below threshold {threshold}")]
    CapTooSmall {
        t_hi: f64,
        value: f64,
        threshold: f64,
    },
    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("cutoff diagnostics need at least two sizes")]
    AtLeastTwoSizes,
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("family size n must be at least 2, got {0}")]
    FamilySizeTooSmall(usize),
    #[error("time {t} outside the window [{lo}, {hi}]")]
    TimeOutOfWindow { t: f64, lo: f64, hi: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("copies must be at least {min}, got {got}")]
    CopiesTooSmall { min: usize, got: usize },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("{0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
