use thiserror::Error;

use crate::pde::State;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid reaction: {0}")]
    InvalidReaction(String),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e} above {tol:e}")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64, tol: f64 },

    #[error("eta = {eta} must lie in (0, {bound}) = (0, min(s0, 1 - s0) / 3)")]
    InvalidEta { eta: f64, bound: f64 },

    #[error("H4 not satisfied at this eta = {eta}: no delta yields positive secant minima")]
    H4NotSatisfied { eta: f64 },

    #[error("unresolved tangency near r = {r}: step size underflow while y grazes zero")]
    UnresolvedTangency { r: f64 },

    #[error("no positive-speed wave exists: F(1) = {f1} is not negative")]
    NoPositiveSpeed { f1: f64 },

    #[error("speed bracket cannot be established: {0}")]
    BracketFailure(String),

    #[error("corrupt y input: y({r}) = {y} is not positive at an interior node")]
    CorruptY { r: f64, y: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("tridiagonal solve failed at row {row}: pivot {pivot:e}")]
    TridiagonalFailure { row: usize, pivot: f64 },

    #[error("non-finite value at t = {t}; last good snapshot at t = {}", last_good.t)]
    NonFinite { t: f64, last_good: Box<State> },

    #[error("front not in domain: v never crosses the level {level}")]
    FrontNotInDomain { level: f64 },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("eta too large for these initial data: admissible q0 interval ({lo}, {hi}) is empty")]
    EmptyQ0Interval { lo: f64, hi: f64 },

    #[error("initial data violate the plateau condition: v0(-inf) = {left}, v0(+inf) = {right}, s0 = {s0}, margin = {margin}")]
    PlateauViolation { left: f64, right: f64, s0: f64, margin: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
