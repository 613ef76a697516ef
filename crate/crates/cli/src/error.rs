use std::fmt;

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or model parameters (exit 2).
    Validation(String),
    /// A numerical routine failed (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<disorder_rmt::Error> for CliError {
    fn from(e: disorder_rmt::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Prefixes library errors with the operation that raised them.
pub fn during(op: &'static str) -> impl Fn(disorder_rmt::Error) -> CliError {
    move |e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{op}: {m}")),
        CliError::Numerical(m) => CliError::Numerical(format!("{op}: {m}")),
    }
}
