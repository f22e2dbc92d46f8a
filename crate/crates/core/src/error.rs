use thiserror::Error;

use crate::funcexpr::EvalError;

/// Errors raised by the numerical core.
///
/// Radii and values are reported as `f64` regardless of the scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid dimension {0}: need n >= {1}")]
    InvalidDimension(usize, usize),

    #[error("warping function is not positive at r = {r} (h = {h})")]
    NonPositiveWarp { r: f64, h: f64 },

    #[error("warping function has no smooth pole: {0}")]
    BadPole(String),

    #[error("coordinate pole at r = {r}: {what} is undefined there")]
    Pole { r: f64, what: &'static str },

    #[error("adaptive quadrature on [{a}, {b}] hit {limit} subdivisions (best value {value}, error estimate {error_estimate})")]
    MaxSubdivisions {
        a: f64,
        b: f64,
        limit: usize,
        value: f64,
        error_estimate: f64,
    },

    #[error("delta = {0} outside [0, 1)")]
    DeltaOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures caused by floating-point overflow, which callers
    /// probing towards infinity treat as the end of the reachable horizon.
    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::Eval(EvalError::Overflow { .. }))
            || matches!(self, Error::NonPositiveWarp { h, .. } if !h.is_finite())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
