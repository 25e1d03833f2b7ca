use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Core(#[from] dtn_core::Error),
    #[error("scenario `{id}`: {source}")]
    Scenario { id: String, source: Box<LabError> },
    #[error("scenario `{id}`: {message}")]
    Unsupported { id: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.to_path_buf(), source }
    }

    pub fn in_scenario(self, id: &str) -> Self {
        match self {
            e @ (LabError::Scenario { .. } | LabError::Unsupported { .. }) => e,
            e => LabError::Scenario { id: id.to_string(), source: Box::new(e) },
        }
    }
}
