//! Configuration, checkpoints, tables and plots.

mod checkpoint;
mod config;
mod plot;
mod table;

pub use checkpoint::{Checkpoint, CheckpointHeader, FORMAT_VERSION};
pub use config::{BuiltProblem, Model, RunConfig};
pub use plot::{render_svg, save_svg, PlotSpec, Series};
pub use table::Table;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("{path}: {msg}")]
    File { path: String, msg: String },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("invalid config: {0}")]
    Config(String),
}

impl IoError {
    pub fn file(path: &Path, e: impl std::fmt::Display) -> Self {
        IoError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        }
    }
}

pub fn parse_table(s: &str) -> Result<Table, IoError> {
    Table::read(s.as_bytes())
}
