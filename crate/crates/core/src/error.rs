use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParams { name: String, reason: String },

    #[error("invalid interval [{a}, {b}]: need finite a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("{what} = {value} out of range: {expected}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("non-finite evaluation at x = {x}")]
    NonFinite { x: f64 },

    #[error("derivative order {order} exceeds max order {max} of `{name}`")]
    OrderTooHigh {
        name: String,
        order: usize,
        max: usize,
    },

    #[error("interval [{a}, {b}] is outside the domain of `{name}`")]
    OutsideDomain { name: String, a: f64, b: f64 },

    #[error("integration did not converge on [{a}, {b}] within the depth cap")]
    NonConvergence { a: f64, b: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown claim `{0}`")]
    UnknownClaim(String),
}

pub type Result<T> = std::result::Result<T, Error>;
