use thiserror::Error;

/// Errors raised by the stable numerics, the combination tests and the
/// simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error(
        "quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e}"
    )]
    QuadratureNonConvergence { error: f64, tolerance: f64 },

    #[error("could not bracket the quantile for p = {p} within {iterations} expansions")]
    BracketFailure { p: f64, iterations: usize },

    #[error("root finding did not converge for p = {p} within {iterations} iterations")]
    RootNonConvergence { p: f64, iterations: usize },

    #[error("quantile for p = {p} is not representable as a finite double")]
    QuantileOverflow { p: f64 },

    #[error("correlation matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical method, as opposed to invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::BracketFailure { .. }
                | Error::RootNonConvergence { .. }
                | Error::QuantileOverflow { .. }
                | Error::NotPositiveDefinite(_)
        )
    }
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
