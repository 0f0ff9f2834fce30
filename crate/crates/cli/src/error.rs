use crate::output::Bundle;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(wavefield_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A run that failed part-way, with whatever results were complete.
    #[error("{source}")]
    Partial {
        bundle: Box<Bundle>,
        source: Box<CliError>,
    },
}

impl From<wavefield_core::Error> for CliError {
    fn from(e: wavefield_core::Error) -> Self {
        match e {
            wavefield_core::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Partial { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
