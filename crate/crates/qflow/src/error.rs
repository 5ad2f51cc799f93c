use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {mode:?} exceeds cap {cap}")]
    CapExceeded { mode: Vec<i64>, cap: i64 },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("unsupported torus dimension {0} (expected 1..=3)")]
    BadDimension(usize),

    #[error("noise path not representable in basis (residual {residual:.3e})")]
    BasisDeficient { residual: f64 },

    #[error("fock vectors live over different noise bases")]
    BasisMismatch,

    #[error("depth {depth} truncation loses {loss:.3e} (relative), above {tol:.3e}")]
    DepthExceeded { depth: usize, loss: f64, tol: f64 },

    #[error("element is not positive: {0}")]
    NotPositive(String),

    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
