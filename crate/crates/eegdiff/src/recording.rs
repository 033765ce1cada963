//! Recordings on disk: a JSON manifest next to a flat little-endian `f32`
//! sample file laid out `[channel][sample]`.

use std::fs;
use std::path::{Path, PathBuf};

use eegdiff_core::{Channel, Difficulty, Event, Recording, RecordingError};
use serde::{Deserialize, Serialize};

use crate::IoError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEvent {
    pub onset: usize,
    pub offset: usize,
    /// 0 = none, 1 = static, 2 = dynamic.
    pub difficulty: u8,
}

/// Every field is required, including `byte_order` and `dtype`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub subject_id: String,
    pub sample_rate_hz: u32,
    pub channel_labels: Vec<String>,
    pub n_samples: usize,
    /// Relative to the manifest's directory.
    pub data_file: String,
    pub byte_order: String,
    pub dtype: String,
    pub events: Vec<ManifestEvent>,
    pub mot_score: f64,
    pub vs_score: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordingIoError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {actual} bytes, expected {expected} ({channels} channels x {n_samples} samples x 4)")]
    LengthMismatch { path: PathBuf, expected: u64, actual: u64, channels: usize, n_samples: usize },
    #[error("{path}: unknown channel label {label:?}")]
    UnknownChannelLabel { path: PathBuf, label: String },
    #[error("{path}: events starting at samples {first} and {second} overlap")]
    OverlappingEvents { path: PathBuf, first: usize, second: usize },
    #[error("{path}: unsupported {field} {value:?} (expected {expected:?})")]
    Unsupported { path: PathBuf, field: &'static str, value: String, expected: &'static str },
    #[error("{path}: difficulty {value} is not 0, 1 or 2")]
    BadDifficulty { path: PathBuf, value: u8 },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: RecordingError },
    #[error("{path}: malformed manifest: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] IoError),
}

fn read(path: &Path) -> Result<Vec<u8>, RecordingIoError> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => RecordingIoError::MissingFile(path.to_path_buf()),
        _ => IoError::new(path, e).into(),
    })
}

fn check(path: &Path, field: &'static str, value: &str, expected: &'static str) -> Result<(), RecordingIoError> {
    if value == expected {
        Ok(())
    } else {
        Err(RecordingIoError::Unsupported { path: path.to_path_buf(), field, value: value.into(), expected })
    }
}

pub fn load_recording(manifest_path: &Path) -> Result<Recording, RecordingIoError> {
    let text = read(manifest_path)?;
    let m: Manifest = serde_json::from_slice(&text)
        .map_err(|source| RecordingIoError::Manifest { path: manifest_path.to_path_buf(), source })?;
    check(manifest_path, "byte_order", &m.byte_order, "little")?;
    check(manifest_path, "dtype", &m.dtype, "f32")?;
    let channels = m
        .channel_labels
        .iter()
        .map(|l| {
            l.parse::<Channel>().map_err(|_| RecordingIoError::UnknownChannelLabel {
                path: manifest_path.to_path_buf(),
                label: l.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let events = m
        .events
        .iter()
        .map(|e| match Difficulty::from_index(e.difficulty.into()) {
            Some(d) => Ok(Event::new(e.onset, e.offset, d)),
            None => Err(RecordingIoError::BadDifficulty { path: manifest_path.to_path_buf(), value: e.difficulty }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let data_path = manifest_path.parent().unwrap_or(Path::new(".")).join(&m.data_file);
    let bytes = read(&data_path)?;
    let expected = (channels.len() * m.n_samples * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(RecordingIoError::LengthMismatch {
            path: data_path,
            expected,
            actual: bytes.len() as u64,
            channels: channels.len(),
            n_samples: m.n_samples,
        });
    }
    let r = Recording {
        subject_id: m.subject_id,
        sample_rate_hz: m.sample_rate_hz,
        channels,
        n_samples: m.n_samples,
        samples: crate::blob::decode_f32(&bytes),
        events,
        mot_score: m.mot_score,
        vs_score: m.vs_score,
    };
    r.validate().map_err(|source| match source {
        RecordingError::OverlappingEvents { first, second } => {
            RecordingIoError::OverlappingEvents { path: manifest_path.to_path_buf(), first, second }
        }
        source => RecordingIoError::Invalid { path: manifest_path.to_path_buf(), source },
    })?;
    Ok(r)
}

/// Writes `<subject_id>.json` and `<subject_id>.f32` into `dir` and returns
/// the manifest path.
pub fn save_recording(r: &Recording, dir: &Path) -> Result<PathBuf, RecordingIoError> {
    r.validate().map_err(|source| RecordingIoError::Invalid { path: dir.to_path_buf(), source })?;
    fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
    let data_file = format!("{}.f32", r.subject_id);
    let manifest = Manifest {
        subject_id: r.subject_id.clone(),
        sample_rate_hz: r.sample_rate_hz,
        channel_labels: r.channels.iter().map(|c| c.name().to_string()).collect(),
        n_samples: r.n_samples,
        data_file: data_file.clone(),
        byte_order: "little".into(),
        dtype: "f32".into(),
        events: r
            .events
            .iter()
            .map(|e| ManifestEvent { onset: e.onset, offset: e.offset, difficulty: e.difficulty.index() as u8 })
            .collect(),
        mot_score: r.mot_score,
        vs_score: r.vs_score,
    };
    let data_path = dir.join(data_file);
    crate::write_file(&data_path, &crate::blob::encode_f32(&r.samples))?;
    let manifest_path = dir.join(format!("{}.json", r.subject_id));
    crate::write_json(&manifest_path, &manifest)?;
    Ok(manifest_path)
}

/// Loads every manifest (`*.json`) in `dir`, in file-name order.
pub fn load_dataset(dir: &Path) -> Result<Vec<Recording>, RecordingIoError> {
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => RecordingIoError::MissingFile(dir.to_path_buf()),
        _ => IoError::new(dir, e).into(),
    })?;
    let mut manifests = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| IoError::new(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            manifests.push(path);
        }
    }
    manifests.sort();
    if manifests.is_empty() {
        return Err(RecordingIoError::MissingFile(dir.join("*.json")));
    }
    manifests.iter().map(|p| load_recording(p)).collect()
}

pub fn save_dataset(recordings: &[Recording], dir: &Path) -> Result<Vec<PathBuf>, RecordingIoError> {
    recordings.iter().map(|r| save_recording(r, dir)).collect()
}
