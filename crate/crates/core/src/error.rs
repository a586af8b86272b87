use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and exact routines of this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole of {what} at {at}")]
    Pole { what: String, at: Complex64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("tail not negligible: estimated tail {tail:e} exceeds tolerance {tolerance:e}")]
    TailNotNegligible { tail: f64, tolerance: f64 },
    #[error("series truncation insufficient: tail bound {tail:e} exceeds tolerance {tolerance:e}")]
    Truncation { tail: f64, tolerance: f64 },
    #[error("singular matrix (|det| = {0:e})")]
    Singular(f64),
    #[error("calibration inconsistency: relative spread {spread:e} exceeds {limit:e}")]
    Calibration { spread: f64, limit: f64 },
    #[error("outside convergence regime: {0}")]
    Regime(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("contour passes within {distance:e} of a pole at {at}")]
    PoleProximity { at: Complex64, distance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
