use selfish_bandit::Error as CoreError;

/// Exit code for invalid parameters, regime mismatches and malformed input.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for a trial whose distribution left the simplex.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) => EXIT_USAGE,
            CliError::Core(e) => match e.root() {
                CoreError::HardNumericDrift { .. } => EXIT_NUMERIC,
                CoreError::Domain(_)
                | CoreError::InvalidParams(_)
                | CoreError::RegimeMismatch(_)
                | CoreError::HorizonTooShort { .. }
                | CoreError::Eps2TooLarge { .. } => EXIT_USAGE,
                CoreError::Trial { .. } => 1,
            },
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}
