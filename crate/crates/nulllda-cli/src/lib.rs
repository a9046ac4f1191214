//! Internals of the `nulllda` binary: CSV ingestion and model persistence.

pub mod data;
pub mod model_file;

/// Command failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input: bad CSV, bad flags, unreadable files. Exit 2.
    Input(String),
    /// The retry budget ran out without a full-rank sketch. Exit 3.
    RetriesExhausted(usize),
    /// An injected sketch failed the certificate. Exit 4.
    SketchRejected,
    /// A stored model failed validation on load. Exit 5.
    DegenerateModel(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::RetriesExhausted(_) => 3,
            CliError::SketchRejected => 4,
            CliError::DegenerateModel(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::RetriesExhausted(n) => {
                write!(f, "no full-rank sketch found after {n} retries")
            }
            CliError::SketchRejected => write!(f, "sketch rejected"),
            CliError::DegenerateModel(msg) => write!(f, "degenerate model: {msg}"),
        }
    }
}

impl From<nulllda::Error> for CliError {
    fn from(e: nulllda::Error) -> Self {
        match e {
            nulllda::Error::RetriesExhausted(n) => CliError::RetriesExhausted(n),
            other => CliError::Input(other.to_string()),
        }
    }
}
