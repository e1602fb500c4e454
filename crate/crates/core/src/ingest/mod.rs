//! Loading embedding matrices and run manifests from disk, and row
//! subsampling for rank estimation.

mod delimited;
mod manifest;
mod npy;
mod raw;
mod subsample;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use delimited::{load_csv, parse_csv};
pub use manifest::{load_manifest, parse_manifest, HpValue, RunManifest, RunRecord};
pub use npy::{load_npy, read_npy, write_npy, write_npy_to, NPY_MAGIC};
pub use raw::{load_raw, write_raw, RawSidecar};
pub use subsample::{subsample_indices, subsample_rows, DEFAULT_SAMPLES};

use crate::matrix::EmbeddingMatrix;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not an NPY file: magic bytes do not match \\x93NUMPY")]
    MagicMismatch,
    #[error("unsupported NPY version {major}.{minor} (only 1.0 is read)")]
    UnsupportedVersion { major: u8, minor: u8 },
    #[error("unsupported dtype descriptor {0:?} (expected '<f4' or '<f8')")]
    UnsupportedDtype(String),
    #[error("fortran_order arrays are not supported")]
    UnsupportedOrder,
    #[error("bad shape: {0}")]
    ShapeError(String),
    #[error("malformed header: {0}")]
    HeaderError(String),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot parse {value:?} at row {row}, column {col}")]
    ParseError {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("manifest schema error: {0}")]
    SchemaError(String),
    #[error("duplicate run id {0:?}")]
    DuplicateRunId(String),
    #[error("ordered manifest has non-monotone hp_value at run index {index}")]
    UnorderedValues { index: usize },
    #[error("manifest contains no runs")]
    EmptyManifest,
    #[error("unrecognized matrix format for {0} (use .npy, .csv or .bin/.raw with a .json sidecar)")]
    UnknownFormat(PathBuf),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// On-disk encodings understood by [`load_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Npy,
    Csv { has_header: bool },
    Raw,
}

impl MatrixFormat {
    /// Guesses the format from the file extension.
    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "npy" => Some(MatrixFormat::Npy),
            "csv" => Some(MatrixFormat::Csv { has_header: false }),
            "bin" | "raw" | "f32" | "f64" => Some(MatrixFormat::Raw),
            _ => None,
        }
    }
}

/// Loads a matrix in the given format, or the one implied by the extension.
pub fn load_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<EmbeddingMatrix, IngestError> {
    let format = format
        .or_else(|| MatrixFormat::from_extension(path))
        .ok_or_else(|| IngestError::UnknownFormat(path.to_path_buf()))?;
    match format {
        MatrixFormat::Npy => load_npy(path),
        MatrixFormat::Csv { has_header } => load_csv(path, has_header),
        MatrixFormat::Raw => load_raw(path),
    }
}
