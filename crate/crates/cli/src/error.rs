use std::path::PathBuf;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::report::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A feature cell that parsed but is NaN or infinite.
    #[error("{path}: non-finite value {value:?} at row {row} (line {line}), column {column}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        line: u64,
        column: String,
        value: String,
    },

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Algorithm(#[from] qrsel::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::NonFinite { .. } | CliError::Data(_) => "data",
            CliError::Algorithm(_) => "algorithm",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut e = Map::new();
        e.insert("kind".into(), json!(self.kind()));
        e.insert("message".into(), json!(self.to_string()));
        match self {
            CliError::Io { path, .. } => {
                e.insert("path".into(), json!(path));
            }
            CliError::Parse { path, line, .. } => {
                e.insert("path".into(), json!(path));
                e.insert("line".into(), json!(line));
            }
            CliError::NonFinite {
                path,
                row,
                line,
                column,
                ..
            } => {
                e.insert("path".into(), json!(path));
                e.insert("row".into(), json!(row));
                e.insert("line".into(), json!(line));
                e.insert("column".into(), json!(column));
            }
            _ => {}
        }
        json!({ "schema_version": SCHEMA_VERSION, "error": Value::Object(e) })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
