use thiserror::Error;

use crate::conditions::HypothesisCheck;

/// Failures of the numerical substrate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature did not converge on [{lo}, {hi}] within {budget} subdivisions (estimate {estimate}, error {error})")]
    NonConvergent {
        lo: f64,
        hi: f64,
        budget: usize,
        estimate: f64,
        error: f64,
    },
    #[error("integrand is negative or undefined at t = {t} (value {value})")]
    Domain { t: f64, value: f64 },
    #[error("tail measure leaves (0, inf) at t = {t}: G(t) = {value}")]
    ClassViolation { t: f64, value: f64 },
    #[error("invalid interval ({lo}, {hi})")]
    BadInterval { lo: f64, hi: f64 },
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("weight `{expr}` is negative or undefined at t = {witness} (value {value})")]
    Validation {
        expr: String,
        witness: f64,
        value: f64,
    },
    #[error("invalid exponent {0}: exponents must lie in (0, inf]")]
    Exponent(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate weight: {0}")]
    DegenerateWeight(String),
    #[error("regime {regime} does not match estimator {estimator}")]
    WrongRegime {
        regime: String,
        estimator: &'static str,
    },
    #[error("hypothesis failed: {}", .0.summary())]
    HypothesisFailed(Box<HypothesisCheck>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
