use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("value iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Errors caused by the user's input files or parameters rather than by
    /// the computation itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            LabError::Config(_) | LabError::Parameter(_) | LabError::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parameter(msg.into()))
}
