use thiserror::Error;

/// Errors raised by the exact workbench.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed fraction string {0:?}")]
    BadFraction(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("objects belong to different systems")]
    MismatchedSystems,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("partition is not invariant: block {block} is split by map {map}")]
    NonInvariantPartition { block: usize, map: usize },
    #[error("factor maps target different systems")]
    MismatchedFactorTargets,
    #[error("pushforward of the source measure does not match the target weights")]
    PushforwardMismatch,
    #[error("factor map is not equivariant for map {map} at point {point}")]
    NotEquivariant { map: usize, point: usize },
    #[error("observable must be in exact mode")]
    FloatObservable,
    #[error("expected {expected} observables, got {got}")]
    WrongObservableCount { expected: usize, got: usize },
    #[error("period {period} exceeds the configured cap {cap}")]
    PeriodCapExceeded { period: String, cap: u64 },
    #[error("system is not a C-system")]
    NotCSystem,
    #[error("coupling marginal {component} does not match the component weights")]
    MarginalMismatch { component: usize },
    #[error("product space has {tuples} tuples, above the bound {bound}")]
    BoundExceeded { tuples: usize, bound: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal LP failure: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;
