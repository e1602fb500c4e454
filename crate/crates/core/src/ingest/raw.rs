//! Headerless little-endian float dumps described by a JSON sidecar.
//!
//! The sidecar for `emb.bin` lives at `emb.bin.json` and reads
//! `{"shape": [N, K], "dtype": "f32"}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::matrix::{Dtype, EmbeddingMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSidecar {
    pub shape: [usize; 2],
    pub dtype: Dtype,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn load_raw(path: &Path) -> Result<EmbeddingMatrix, IngestError> {
    let side_path = sidecar_path(path);
    let side_text = fs::read_to_string(&side_path).map_err(|e| IngestError::io(&side_path, e))?;
    let side: RawSidecar = serde_json::from_str(&side_text)
        .map_err(|e| IngestError::HeaderError(format!("{}: {e}", side_path.display())))?;
    let bytes = fs::read(path).map_err(|e| IngestError::io(path, e))?;

    let [n_rows, n_cols] = side.shape;
    let expected = n_rows * n_cols * side.dtype.size_of();
    if bytes.len() != expected {
        return Err(IngestError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let data = match side.dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    EmbeddingMatrix::new(n_rows, n_cols, data, side.dtype)
        .map(|m| m.with_label(path.display().to_string()))
}

/// Writes the payload and its sidecar.
pub fn write_raw(path: &Path, m: &EmbeddingMatrix) -> Result<(), IngestError> {
    let mut bytes = Vec::with_capacity(m.as_slice().len() * m.dtype().size_of());
    for &v in m.as_slice() {
        match m.dtype() {
            Dtype::F32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::F64 => bytes.extend_from_slice(&v.to_le_bytes()),
        }
    }
    fs::write(path, bytes).map_err(|e| IngestError::io(path, e))?;
    let side = RawSidecar {
        shape: [m.n_rows(), m.n_cols()],
        dtype: m.dtype(),
    };
    let side_path = sidecar_path(path);
    fs::write(&side_path, serde_json::to_string(&side).unwrap())
        .map_err(|e| IngestError::io(&side_path, e))
}
