//! File formats, pipeline stages and the command line of the EEG
//! task-difficulty toolkit. The numerical work lives in `eegdiff_core`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

pub mod blob;
pub mod cli;
pub mod config;
pub mod epochs;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod recording;
pub mod report;

pub use config::{ConfigError, Overrides, PipelineConfig};
pub use recording::{load_dataset, load_recording, save_dataset, save_recording, Manifest, RecordingIoError};
pub use report::{parse_report, read_report, render_report, write_report};

/// An operating-system failure on a particular file.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

impl IoError {
    pub fn new(path: &Path, source: std::io::Error) -> Self {
        Self { path: path.to_path_buf(), source }
    }
}

/// Failure to read an artifact produced by an earlier stage.
#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("missing file {}", .0.display())]
    Missing(PathBuf),
    #[error("{}: {reason}", path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] IoError),
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| IoError::new(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_vec_pretty(value).expect("artifact serializes");
    text.push(b'\n');
    write_file(path, &text)
}

pub(crate) fn read_artifact(path: &Path) -> Result<Vec<u8>, ArtifactError> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => ArtifactError::Missing(path.to_path_buf()),
        _ => IoError::new(path, e).into(),
    })
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ArtifactError> {
    let bytes = read_artifact(path)?;
    serde_json::from_slice(&bytes).map_err(|e| ArtifactError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })
}
