//! The cleaned epoch store written by the preprocessing stage.

use std::path::Path;

use eegdiff_core::dsp::{Epoch, EPOCH_LEN};
use eegdiff_core::experiments::SubjectScores;
use eegdiff_core::{Channel, Difficulty};
use serde::{Deserialize, Serialize};

use crate::blob::{decode_f32, encode_f32, read_container, write_container};
use crate::ArtifactError;

/// Epochs sharing one channel layout, plus each subject's test scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStore {
    pub channels: Vec<Channel>,
    pub epochs: Vec<Epoch>,
    pub subjects: Vec<SubjectScores>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    byte_order: String,
    dtype: String,
    epoch_len: usize,
    channels: Vec<Channel>,
    labels: Vec<(String, Difficulty)>,
    subjects: Vec<SubjectScores>,
}

impl EpochStore {
    pub fn labels(&self) -> Vec<Difficulty> {
        self.epochs.iter().map(|e| e.difficulty).collect()
    }

    pub fn subject_ids(&self) -> Vec<&str> {
        self.epochs.iter().map(|e| e.subject_id.as_str()).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        let mut payload = Vec::with_capacity(self.epochs.len() * self.channels.len() * EPOCH_LEN * 4);
        for e in &self.epochs {
            if e.channels != self.channels {
                return Err(ArtifactError::Corrupt {
                    path: path.to_path_buf(),
                    reason: format!("epoch of {} has a different channel layout", e.subject_id),
                });
            }
            payload.extend(encode_f32(&e.samples));
        }
        let header = Header {
            byte_order: "little".into(),
            dtype: "f32".into(),
            epoch_len: EPOCH_LEN,
            channels: self.channels.clone(),
            labels: self.epochs.iter().map(|e| (e.subject_id.clone(), e.difficulty)).collect(),
            subjects: self.subjects.clone(),
        };
        Ok(write_container(path, &header, &payload)?)
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let (h, payload): (Header, _) = read_container(path)?;
        let corrupt = |reason: String| ArtifactError::Corrupt { path: path.to_path_buf(), reason };
        if h.byte_order != "little" || h.dtype != "f32" || h.epoch_len != EPOCH_LEN {
            return Err(corrupt(format!("unsupported layout {} {} x{}", h.byte_order, h.dtype, h.epoch_len)));
        }
        let per_epoch = h.channels.len() * EPOCH_LEN;
        if payload.len() != h.labels.len() * per_epoch * 4 {
            return Err(corrupt(format!("{} payload bytes for {} epochs", payload.len(), h.labels.len())));
        }
        let samples = decode_f32(&payload);
        let epochs = h
            .labels
            .into_iter()
            .enumerate()
            .map(|(i, (subject_id, difficulty))| Epoch {
                subject_id,
                channels: h.channels.clone(),
                samples: samples[i * per_epoch..(i + 1) * per_epoch].to_vec(),
                difficulty,
            })
            .collect();
        Ok(Self { channels: h.channels, epochs, subjects: h.subjects })
    }
}
