use kahlerflow::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(String),

    #[error("analytic-domain error: {0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
            Self::Domain(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::CriticalRegime { .. } | CoreError::CriticalMode { .. } | CoreError::PoleOfChart { .. } => Self::Domain(e.to_string()),
            CoreError::InvalidParameter(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::WrongKind(_)
            | CoreError::ZeroNorm
            | CoreError::Degenerate(_)
            | CoreError::ChartDomain { .. }
            | CoreError::NonDiagonalMetric => Self::Config(e.to_string()),
            CoreError::NotSelfAdjoint { .. } | CoreError::NotHermitian { .. } => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}
