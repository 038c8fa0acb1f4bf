use std::path::PathBuf;

use coexist_core::{ConfigError, MetricsError, ModelError, TraceError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown preset `{0}` (expected case_a..case_g or custom)")]
    UnknownPreset(String),
    #[error("cannot parse config {path}: {source}")]
    Config {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("{path}: {source}")]
    Metrics {
        path: PathBuf,
        source: MetricsError,
    },
    #[error("no completed runs under {0}")]
    NoRuns(PathBuf),
    #[error("batch {dir} is missing {what}")]
    MissingRun { dir: PathBuf, what: String },
}

pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
