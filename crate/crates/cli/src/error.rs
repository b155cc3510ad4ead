use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// A modelling assumption (stable, settled `A(∞)`) does not hold for the scenario.
    #[error("scenario rejected: {0}")]
    Assumption(gapbound::Error),

    #[error(transparent)]
    Core(gapbound::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl From<gapbound::Error> for CliError {
    fn from(e: gapbound::Error) -> Self {
        match e {
            gapbound::Error::Assumption(_) => CliError::Assumption(e),
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Assumption(_) => 3,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}
