use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The engine gave up on a run; exit code 3.
    #[error("simulation aborted: {0}")]
    Simulation(swdl_core::Error),
    /// Writing results failed; exit code 1.
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<swdl_core::Error> for CliError {
    fn from(e: swdl_core::Error) -> Self {
        if e.is_simulation_abort() {
            CliError::Simulation(e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}
