//! Feature matrix file: one text line of comma-separated feature names
//! (`Pz-O2:low_alpha`, ..., then `label`), followed by little-endian `f32`
//! rows each ending in the class index. Subject ids go to a JSON sidecar.

use std::path::{Path, PathBuf};

use eegdiff_core::matrix::Matrix;
use eegdiff_core::Difficulty;

use crate::blob::{decode_f32, encode_f32};
use crate::ArtifactError;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub features: Matrix,
    pub labels: Vec<Difficulty>,
    pub subjects: Vec<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("subjects.json")
}

impl FeatureTable {
    pub fn save(&self, path: &Path) -> Result<(), ArtifactError> {
        let mut bytes = self.names.join(",").into_bytes();
        bytes.extend_from_slice(b",label\n");
        let mut row = Vec::with_capacity(self.names.len() + 1);
        for (x, label) in self.features.rows().zip(&self.labels) {
            row.clear();
            row.extend(x.iter().map(|&v| v as f32));
            row.push(label.index() as f32);
            bytes.extend(encode_f32(&row));
        }
        crate::write_file(path, &bytes)?;
        crate::write_json(&sidecar_path(path), &self.subjects)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let bytes = crate::read_artifact(path)?;
        let corrupt = |reason: String| ArtifactError::Corrupt { path: path.to_path_buf(), reason };
        let split = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| corrupt("no header line".into()))?;
        let header = std::str::from_utf8(&bytes[..split]).map_err(|e| corrupt(e.to_string()))?;
        let mut names: Vec<String> = header.split(',').map(str::to_string).collect();
        if names.pop().as_deref() != Some("label") {
            return Err(corrupt("header must end with the label column".into()));
        }
        let width = names.len() + 1;
        let values = decode_f32(&bytes[split + 1..]);
        if (bytes.len() - split - 1) % (4 * width) != 0 {
            return Err(corrupt(format!("payload is not a whole number of {width}-column rows")));
        }
        let n = values.len() / width;
        let mut data = Vec::with_capacity(n * names.len());
        let mut labels = Vec::with_capacity(n);
        for row in values.chunks_exact(width) {
            data.extend(row[..width - 1].iter().map(|&v| f64::from(v)));
            let label = row[width - 1];
            labels.push(
                Difficulty::from_index(label as usize)
                    .filter(|d| d.index() as f32 == label)
                    .ok_or_else(|| corrupt(format!("bad label {label}")))?,
            );
        }
        let subjects: Vec<String> = crate::read_json(&sidecar_path(path))?;
        if subjects.len() != n {
            return Err(corrupt(format!("{} subject ids for {n} rows", subjects.len())));
        }
        let features = Matrix::from_vec(n, names.len(), data).expect("sized above");
        Ok(Self { names, features, labels, subjects })
    }
}
