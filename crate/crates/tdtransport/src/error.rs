use tdtransport_core::Error as CoreError;

/// Exit status for input and validation problems.
pub const EXIT_VALIDATION: u8 = 1;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numeric(CoreError),

    #[error("{failed} self-test check(s) failed")]
    SelftestFailed { failed: usize },
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        if err.is_validation() {
            CliError::Validation(err.to_string())
        } else {
            CliError::Numeric(err)
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io {
            context: "writing CSV".into(),
            source: err.into(),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Numeric(_) | CliError::SelftestFailed { .. } => EXIT_NUMERIC,
        }
    }
}
