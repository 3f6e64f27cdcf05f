use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid function: {0}")]
    InvalidFunction(String),

    #[error("mollifier radius {delta} is below one cell (min spacing {min_h})")]
    MollifierTooNarrow { delta: f64, min_h: f64 },

    #[error("invalid exponent field: {0}")]
    InvalidExponent(String),

    #[error("invalid integrand: {0}")]
    InvalidIntegrand(String),

    #[error("tabulated Φ-function does not cover the requested range: {0}")]
    TabulatedRange(String),

    #[error("jump at {location} lies outside Y = {{p = 1}}")]
    JumpOutsideY { location: String },

    #[error("jump set is not representable as a nodal function: {0}")]
    UnrepresentableJumpSet(String),

    #[error("luxemburg norm: no bracket with modular ≤ 1 could be found")]
    NormBracket,

    #[error("sequence does not converge to the limit in the p(·)-norm: {0}")]
    NonConvergentSequence(String),

    #[error("{path}: parse error at line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
