//! Command-line front end: bound reports for JSON-described states, figure
//! sweeps written as CSV, and the acceptance corpus.

pub mod acceptance;
pub mod figures;
pub mod json;
pub mod schema;

use std::fmt;
use std::path::Path;

use ncd_core::Error;

pub use schema::{parse_state, ParsedState, SchemaError};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const TRUNCATION: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Schema(SchemaError),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => exit::IO,
            CliError::Schema(_) => exit::SCHEMA,
            CliError::Core(e) => match e {
                Error::TruncationTooSmall { .. }
                | Error::CutoffExceeded { .. }
                | Error::InvalidTruncation(_)
                | Error::DimensionTooLarge { .. } => exit::TRUNCATION,
                Error::InvalidParameter(_)
                | Error::Unnormalized { .. }
                | Error::ShapeMismatch(_)
                | Error::InvalidModes(_) => exit::SCHEMA,
                _ => exit::NUMERICAL,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Schema(e) => write!(f, "schema error at {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Schema(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Reads a state document from a file, or from standard input for `-`.
pub fn load_state(path: &Path) -> Result<ParsedState, CliError> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
            .map_err(|e| CliError::Io(format!("standard input: {e}")))?
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
    };
    Ok(parse_state(&text)?)
}
