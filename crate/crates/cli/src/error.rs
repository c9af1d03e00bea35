/// Harness-level errors. Exit code 1 marks a failed cross-workflow
/// assertion, exit code 2 everything else (configuration, ingest, IO).
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("ingest error at line {line}: {reason}")]
    Ingest { line: u64, reason: String },

    #[error("duplicate entity id {id:?} at line {line}")]
    DuplicateId { id: String, line: u64 },

    #[error(transparent)]
    Core(#[from] dedup_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("workflow pair sets differ: {0}")]
    EqualityFailed(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::EqualityFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
