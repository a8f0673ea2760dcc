use thiserror::Error;

/// Errors raised while parsing or evaluating coefficient expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} is undefined at zero")]
    Domain { func: &'static str },
    #[error("non-finite value")]
    NonFinite,
    #[error("`{0}` is not differentiable")]
    NonDifferentiable(&'static str),
}

/// Errors produced by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {y} lies outside [{a}, {b}]")]
    OutOfRange { y: f64, a: f64, b: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("coefficient {what} vanishes or is not finite at y = {y}")]
    BadCoefficient { what: &'static str, y: f64 },
    #[error("branch jump in {what} near y = {y}")]
    BranchJump { what: &'static str, y: f64 },
    #[error("symmetric mode needs real positive r/p (offending y = {y})")]
    NotRealPositive { y: f64 },
    #[error("particular solution series did not converge after {terms} terms")]
    SeriesDivergence { terms: usize },
    #[error("particular solution vanishes on the grid (min |g| / max |g| = {ratio:e})")]
    VanishingSolution { ratio: f64 },
    #[error("formal power recursion overflowed at k = {k}")]
    FormalPowerOverflow { k: usize },
    #[error("least-squares system is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("spectral parameter too close to zero: |omega| = {0:e}")]
    OmegaTooSmall(f64),
    #[error("Newton iteration did not converge from omega = {start}")]
    NoConvergence { start: num_complex::Complex64 },
    #[error("contour passes through a zero and could not be moved off it")]
    ContourHit,
    #[error("ODE integration failed: {0}")]
    Integration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
