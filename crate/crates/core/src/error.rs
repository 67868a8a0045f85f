use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("sign of the separation is unidentifiable at pi = 0.5: {0}")]
    SignUnidentifiable(String),

    #[error("weak instrument: pi1 == pi0 ({0})")]
    WeakInstrument(f64),

    #[error("objective is not finite at x = {x}")]
    NonFinite { x: f64 },

    #[error("quadrature budget exhausted after {subdivisions} subdivisions (partial estimate {partial}, error estimate {error})")]
    QuadratureBudget { partial: f64, error: f64, subdivisions: usize },

    #[error("singular covariance: {0}")]
    Singular(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("empty cell {0}")]
    EmptyCell(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
