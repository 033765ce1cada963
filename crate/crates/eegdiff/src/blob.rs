//! Little-endian float buffers and the "JSON header line + raw payload"
//! container used by the epoch store and the network checkpoint.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{ArtifactError, IoError};

pub fn encode_f32(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Trailing bytes that do not fill a whole value are ignored.
pub fn decode_f32(bytes: &[u8]) -> Vec<f32> {
    bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect()
}

pub fn encode_f64(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f64(bytes: &[u8]) -> Vec<f64> {
    bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect()
}

pub fn write_container<H: Serialize>(path: &Path, header: &H, payload: &[u8]) -> Result<(), IoError> {
    let mut bytes = serde_json::to_vec(header).expect("header serializes");
    bytes.push(b'\n');
    bytes.extend_from_slice(payload);
    crate::write_file(path, &bytes)
}

pub fn read_container<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<u8>), ArtifactError> {
    let bytes = crate::read_artifact(path)?;
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ArtifactError::Corrupt { path: path.to_path_buf(), reason: "no header line".into() })?;
    let header = serde_json::from_slice(&bytes[..split])
        .map_err(|e| ArtifactError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })?;
    Ok((header, bytes[split + 1..].to_vec()))
}
