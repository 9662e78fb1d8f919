use std::fmt;

/// Failures mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input data at a 1-based line.
    Parse { line: usize, message: String },
    /// Bad flag values or arguments.
    Usage(String),
    Estimator(qse_core::Error),
    /// Cells whose failure rate exceeded the limit; output was still written.
    InvalidCells(Vec<String>),
    Io(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Estimator(_) => 3,
            CliError::InvalidCells(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, message } => write!(f, "parse error on line {line}: {message}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Estimator(e) => write!(f, "{}: {e}", e.name()),
            CliError::InvalidCells(cells) => {
                writeln!(f, "{} cell(s) exceeded the failure-rate limit:", cells.len())?;
                for c in cells {
                    writeln!(f, "  {c}")?;
                }
                Ok(())
            }
            CliError::Io(msg) | CliError::Other(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<qse_core::Error> for CliError {
    fn from(e: qse_core::Error) -> Self {
        CliError::Estimator(e)
    }
}

impl From<qse_bench::BenchError> for CliError {
    fn from(e: qse_bench::BenchError) -> Self {
        match e {
            qse_bench::BenchError::Estimator(inner) => CliError::Estimator(inner),
            qse_bench::BenchError::Config(msg) => CliError::Usage(msg),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
