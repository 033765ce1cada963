//! Trained-model artifacts: the SVM as JSON, the network as a JSON header
//! line followed by its parameters as little-endian `f64`, and the training
//! history as CSV.

use std::fmt::Write as _;
use std::path::Path;

use eegdiff_core::nn::{Cnn, EpochRecord, NetworkSpec, Params, TrainConfig};
use eegdiff_core::svm::{MulticlassSvm, SvmConfig};
use serde::{Deserialize, Serialize};

use crate::blob::{decode_f64, encode_f64, read_container, write_container};
use crate::{ArtifactError, IoError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmCheckpoint {
    /// Feature-matrix columns the machine was trained on.
    pub columns: Vec<usize>,
    pub names: Vec<String>,
    pub config: SvmConfig,
    pub model: MulticlassSvm,
}

impl SvmCheckpoint {
    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        crate::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        crate::read_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CnnHeader {
    byte_order: String,
    dtype: String,
    spec: NetworkSpec,
    train: TrainConfig,
    best_epoch: Option<usize>,
    tensors: Vec<(String, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnCheckpoint {
    pub cnn: Cnn,
    pub train: TrainConfig,
    pub best_epoch: Option<usize>,
}

impl CnnCheckpoint {
    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let p = &self.cnn.params;
        let header = CnnHeader {
            byte_order: "little".into(),
            dtype: "f64".into(),
            spec: self.cnn.spec,
            train: self.train,
            best_epoch: self.best_epoch,
            tensors: Params::NAMES.iter().zip(p.tensors()).map(|(n, t)| (n.to_string(), t.shape.clone())).collect(),
        };
        write_container(path, &header, &encode_f64(&p.flatten()))
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let (h, payload): (CnnHeader, _) = read_container(path)?;
        let corrupt = |reason: String| ArtifactError::Corrupt { path: path.to_path_buf(), reason };
        if h.byte_order != "little" || h.dtype != "f64" {
            return Err(corrupt(format!("unsupported layout {} {}", h.byte_order, h.dtype)));
        }
        let mut params = Params::zeros(&h.spec);
        let expected: Vec<(String, Vec<usize>)> =
            Params::NAMES.iter().zip(params.tensors()).map(|(n, t)| (n.to_string(), t.shape.clone())).collect();
        if h.tensors != expected {
            return Err(corrupt("tensor shapes do not match the network spec".into()));
        }
        if payload.len() != params.count() * 8 || !params.assign(&decode_f64(&payload)) {
            return Err(corrupt(format!("{} payload bytes for {} parameters", payload.len(), params.count())));
        }
        let cnn = Cnn::from_params(h.spec, params).map_err(|e| corrupt(e.to_string()))?;
        Ok(Self { cnn, train: h.train, best_epoch: h.best_epoch })
    }
}

pub fn render_history(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,train_accuracy,val_loss,val_accuracy\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?}",
            r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
        );
    }
    out
}
