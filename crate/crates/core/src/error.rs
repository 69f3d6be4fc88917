use thiserror::Error;

/// Errors raised by the heat-estimate toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeatError {
    #[error("invalid exponent {0}: exponents must lie in [1, inf]")]
    InvalidExponent(String),

    #[error("cannot parse exponent {0:?}")]
    ExponentParse(String),

    #[error("no admissible r for p = {p}, q = {q}: 1/p + 1/q < 1")]
    InvalidTriple { p: String, q: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent convolution: 1/tau1 + 1/tau2 = {0} is not positive")]
    DivergentConvolution(f64),

    #[error("Gaussian with width {0} is not normable")]
    NonNormable(f64),

    #[error("extremizer for p = {p}, q = {q} exists only as a limit (beta = {beta})")]
    LimitOnlyExtremizer { p: String, q: String, beta: String },

    #[error("invalid function spec: {0}")]
    InvalidSpec(String),

    #[error("invalid experiment record: {0}")]
    InvalidRecord(String),
}

pub type Result<T> = std::result::Result<T, HeatError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(HeatError::Domain(msg.into()))
}
