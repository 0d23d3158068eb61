//! File formats, diagnosis reports and command implementations for the
//! `ptosis` tool.
//!
//! Exit codes are part of the contract: 0 success, 2 input or schema error,
//! 3 computation error, 4 IO error. See [`ToolError::exit_code`].

pub mod cli;
pub mod commands;
pub mod error;
pub mod fsio;
pub mod landmarks;
pub mod model_file;
pub mod pgm;
pub mod report;
pub mod stack_file;
pub mod tables;

pub use error::{ToolError, ToolResult};
