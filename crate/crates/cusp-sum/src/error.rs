use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what} = {value} exceeds capacity {capacity}")]
    Capacity {
        what: &'static str,
        value: f64,
        capacity: f64,
    },
    #[error("integer representation overflow: {0}")]
    Overflow(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("malformed coefficient file (line {line}): {reason}")]
    Malformed { line: usize, reason: String },
    #[error("λ(1) ≠ 1 (found {0})")]
    NotNormalized(f64),
    #[error("Hecke residual {residual:.3e} at {at} above tolerance {tolerance:.1e}")]
    HeckeResidual { residual: f64, at: String, tolerance: f64 },
    #[error("coefficient bound violated at n = {n}: |λ(n)| = {value} > {bound}")]
    BoundViolation { n: usize, value: f64, bound: f64 },
    #[error("missing prime value λ({0})")]
    MissingPrime(usize),
    #[error("gamma pole at {0}")]
    Pole(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("no stationary point: {0}")]
    NoStationaryPoint(String),
    #[error("degenerate phase: {0}")]
    DegeneratePhase(String),
    #[error("tail estimate {estimate:.3e} above target {target:.3e}")]
    Tail { estimate: f64, target: f64 },
    #[error("outside validity window: {0}")]
    Window(String),
    #[error("regime violation: {0}")]
    Regime(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
}
