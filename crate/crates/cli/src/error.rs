use schouten_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The numerics gave up: exit code 3.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn validation(field: &str, e: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("field `{field}`: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGrid(_)
            | CoreError::GridMismatch
            | CoreError::Syntax { .. }
            | CoreError::UnknownIdentifier { .. }
            | CoreError::Domain { .. }
            | CoreError::NotPositiveDefinite { .. }
            | CoreError::UnknownCatalog(_)
            | CoreError::InvalidParameter(_)
            | CoreError::Hypothesis { .. }
            | CoreError::EmptyAdmissibleSet => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
