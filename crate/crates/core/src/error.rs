use thiserror::Error;

/// Errors produced by the geometric and dynamical computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point has a negative coordinate: {0:?}")]
    NegativeCoordinate(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sign change of the defining function along the ray {direction:?}")]
    Bracketing { direction: Vec<f64> },

    #[error("point {point:?} is not on the boundary (|G| = {residual:e})")]
    OffBoundary { point: Vec<f64>, residual: f64 },

    #[error("degenerate normal at {0:?}")]
    DegenerateNormal(Vec<f64>),

    #[error("degenerate pairing w.nu = {0:e}")]
    DegeneratePairing(f64),

    #[error("region is not monotone; {0} is not defined by the toric formula")]
    NotMonotone(&'static str),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("surface drift {drift:e} exceeds the abort threshold at t = {t}")]
    DriftExceeded { t: f64, drift: f64 },

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
