use std::fmt;
use std::path::Path;

use deonnet::syntax::ParseError;

/// Parse errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum CliError {
    Parse { file: String, error: ParseError },
    Domain { name: &'static str, message: String },
}

impl CliError {
    pub fn domain(name: &'static str, message: impl Into<String>) -> Self {
        CliError::Domain {
            name,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::domain("MissingFile", format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Domain { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { file, error } => write!(f, "ParseError: {file}:{error}"),
            // Library messages already lead with their name.
            CliError::Domain { name, message } if message.starts_with(name) => f.write_str(message),
            CliError::Domain { name, message } => write!(f, "{name}: {message}"),
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::domain(e.name(), e.to_string())
            }
        }
    )*};
}

domain_from!(
    deonnet::logic::LogicError,
    deonnet::compiler::CompileError,
    deonnet::neural::NeuralError,
    deonnet::training::TrainingError,
    deonnet::ansio::AnsIoError,
    deonnet::kleene::KleeneError
);

impl From<deonnet::experiment::ExperimentError> for CliError {
    fn from(e: deonnet::experiment::ExperimentError) -> Self {
        match e {
            deonnet::experiment::ExperimentError::Parse(error) => CliError::Parse {
                file: deonnet::experiment::ROBOCUP_FIXTURE.into(),
                error,
            },
            e => CliError::domain(e.name(), e.to_string()),
        }
    }
}
