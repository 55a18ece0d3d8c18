use std::fmt;
use std::io;

/// Exit status 1 for configuration problems, 2 for unreadable or malformed input.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn output(e: io::Error) -> Self {
        CliError::Input(format!("cannot write output: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hashing_pursuit::Error> for CliError {
    fn from(e: hashing_pursuit::Error) -> Self {
        use hashing_pursuit::Error;
        match e {
            Error::Parse(_) | Error::Io(_) => CliError::Input(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
