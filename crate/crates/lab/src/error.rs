use dispersive_core::Error as CoreError;

pub type LabResult<T> = Result<T, LabError>;

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad flags, files or grids.
    #[error("{0}")]
    Usage(String),
    /// The requested physics is outside its validity regime, or a run
    /// failed numerically.
    #[error("{0}")]
    Physics(String),
    /// A bounded search stopped before deciding.
    #[error("{0}")]
    Inconclusive(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) | LabError::Io(_) => 1,
            LabError::Physics(_) => 2,
            LabError::Inconclusive(_) => 3,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ExcessiveLeakage { .. }
            | CoreError::NormDrift { .. }
            | CoreError::LcVerification { .. } => LabError::Physics(e.to_string()),
            _ => LabError::Usage(e.to_string()),
        }
    }
}
