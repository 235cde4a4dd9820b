use std::path::Path;

use magbern_core::{Error, ErrorKind};

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    /// Unknown command or key, or an unparsable value.
    #[error("configuration error: {0}")]
    Config(String),
    /// Rejected command line; the text is clap's rendered message.
    #[error("{0}")]
    Usage(String),
    /// `--help` or `--version` output.
    #[error("{0}")]
    Help(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// A checked inequality failed; the report was still produced.
    #[error("inequality falsified: {0}")]
    Falsified(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// 0 help, 2 validation, 3 numerical, 4 resource, 5 falsified inequality,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Resource => 4,
            },
            CliError::Config(_) | CliError::Format(_) | CliError::Usage(_) => 2,
            CliError::Help(_) => 0,
            CliError::Falsified(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}
