use thiserror::Error;

/// Errors raised by the pricing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {field} {reason}")]
    Domain { field: &'static str, reason: String },

    /// Quadrature or ODE integration did not produce a finite, converged value.
    #[error("integration failure: {0}")]
    Integration(String),

    /// The integral is infinite, e.g. a linearly growing functional with c >= 1.
    #[error("divergent integral (c = {c:.6}): {detail}")]
    Divergent { c: f64, detail: String },

    /// The bracketing solver ran out of iterations.
    #[error(
        "calibration did not converge after {iterations} iterations \
         (sigma = {sigma}, v = {v}, value residual = {residual_value:e}, vol residual = {residual_vol:e})"
    )]
    NonConvergence {
        iterations: usize,
        sigma: f64,
        v: f64,
        residual_value: f64,
        residual_vol: f64,
    },

    /// No root of the calibration system exists inside the admissible region.
    #[error("calibration infeasible: {reason} (boundary sigma = {sigma_boundary})")]
    Infeasible { reason: String, sigma_boundary: f64 },

    /// The dilution bracket that must stay positive for the calibration system went nonpositive.
    #[error("dilution condition violated: {which} = {value:e} <= 0 at sigma = {sigma}, v = {v}")]
    DilutionCondition {
        which: &'static str,
        value: f64,
        sigma: f64,
        v: f64,
    },
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
