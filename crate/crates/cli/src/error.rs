use adaptrial_core::Error as CoreError;

/// Failures reported by the command-line front end.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Configuration or input data rejected; exit status 2.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Failure while running or writing results; exit status 1.
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
