use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius {r} lies outside the open interval ({lo}, {hi})")]
    Domain { r: f64, lo: f64, hi: f64 },

    #[error("invalid weight model: {0}")]
    InvalidWeight(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integral over ({a}, {b}) diverges: {context}")]
    Divergent { a: f64, b: f64, context: String },

    #[error("ODE integration failed at r = {r}: {reason}")]
    Integration { r: f64, reason: String },

    #[error("no eigenvalue bracket in [{lo}, {hi}]; widen the search range")]
    NoBracket { lo: f64, hi: f64 },

    #[error("first-zero location is not monotone in lambda near {lambda}; the problem is likely ill-posed")]
    NonMonotone { lambda: f64 },

    #[error("zero denominator in Rayleigh quotient")]
    ZeroDenominator,

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("nonpositive sample at index {index}: {value}")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("{0}")]
    Window(String),

    #[error("malformed problem JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
