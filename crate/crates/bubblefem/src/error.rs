use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(bubblefem_core::Error),
    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 is success; 1 validation, 2 numerical, 3 acceptance. IO errors count
    /// as validation failures (bad paths).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Acceptance { .. } => 3,
        }
    }
}

impl From<bubblefem_core::Error> for CliError {
    fn from(e: bubblefem_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
