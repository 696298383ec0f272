use thiserror::Error;

/// Errors raised by the geometry, flow, and spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart-domain violation: rho = {rho} is outside the chart (bound {bound})")]
    ChartDomain { rho: f64, bound: f64 },

    #[error("pole of chart reached at t = {t}")]
    PoleOfChart { t: f64 },

    #[error("wrong manifold kind: {0}")]
    WrongKind(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("critical regime: k = {k} lies within the critical band around 1")]
    CriticalRegime { k: f64 },

    #[error("mode {index} is critical (k = {k})")]
    CriticalMode { index: usize, k: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("observable is not self-adjoint (residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("parallel transport requires a diagonal metric")]
    NonDiagonalMetric,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
