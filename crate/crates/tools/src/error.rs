use std::path::{Path, PathBuf};

use ptosis_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    /// Malformed input, schema violation or bad flag. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// A measurement or fit could not be computed. Exit code 3.
    #[error("{0}")]
    Compute(String),
    /// Exit code 4.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type ToolResult<T> = Result<T, ToolError>;

impl ToolError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Input(_) => 2,
            ToolError::Compute(_) => 3,
            ToolError::Io { .. } => 4,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        ToolError::Input(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ToolError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Core errors raised while computing; degenerate data and failed
    /// measurement stages are computation errors, bad parameters are input errors.
    pub fn from_core(context: &str, e: CoreError) -> Self {
        match e {
            CoreError::Parameter(_) => ToolError::Input(format!("{context}: {e}")),
            _ => ToolError::Compute(format!("{context}: {e}")),
        }
    }

    /// Core errors raised while validating input documents.
    pub fn schema(context: &str, e: CoreError) -> Self {
        ToolError::Input(format!("{context}: {e}"))
    }
}
