use std::fmt;
use unclab_core::Error;

/// Failure classes with fixed process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// a computation exceeded a size cap
    Size(String),
    MissingFile(String),
    MalformedRational(String),
    /// schema violations, invalid options and out-of-domain inputs
    Schema(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Size(_) => 1,
            CliError::MissingFile(_) => 2,
            CliError::MalformedRational(_) => 3,
            CliError::Schema(_) => 4,
        }
    }

    /// Errors raised while decoding a JSON document at `path`.
    pub fn from_json(path: &str, e: serde_json::Error) -> CliError {
        let msg = match e.line() {
            0 => format!("{path}: {e}"),
            l => format!("{path}:{l}:{}: {e}", e.column()),
        };
        if e.to_string().contains("malformed rational") {
            CliError::MalformedRational(msg)
        } else {
            CliError::Schema(msg)
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Size(m) => write!(f, "size limit: {m}"),
            CliError::MissingFile(m) => write!(f, "cannot read {m}"),
            CliError::MalformedRational(m) => write!(f, "malformed rational: {m}"),
            CliError::Schema(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Size(m) => CliError::Size(m),
            Error::Domain(m) | Error::Precondition(m) => CliError::Schema(m),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
