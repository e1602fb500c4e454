//! Dense sample-by-dimension embedding matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ingest::IngestError;

/// Storage precision of the data a matrix was loaded from.
///
/// Values are always held as `f64` in memory; the original dtype is kept
/// because the threshold rank's epsilon depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size_of(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }
}

/// An `N x K` matrix of model outputs: one row per sample, one column per
/// feature dimension. Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    dtype: Dtype,
    source_label: String,
}

impl EmbeddingMatrix {
    /// Builds a matrix from a row-major buffer, checking shape and finiteness.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        data: Vec<f64>,
        dtype: Dtype,
    ) -> Result<Self, IngestError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(IngestError::ShapeError(format!(
                "matrix must have at least one row and one column, got {n_rows}x{n_cols}"
            )));
        }
        if data.len() != n_rows * n_cols {
            return Err(IngestError::ShapeError(format!(
                "buffer holds {} values but shape is {n_rows}x{n_cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(IngestError::NonFiniteData {
                row: pos / n_cols,
                col: pos % n_cols,
            });
        }
        Ok(Self {
            data,
            n_rows,
            n_cols,
            dtype,
            source_label: String::new(),
        })
    }

    /// Builds an `f64` matrix from nested rows. Mostly useful in tests.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, IngestError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(IngestError::RaggedRows {
                    row: i,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n_rows, n_cols, data, Dtype::F64)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self, IngestError> {
        let (n_rows, n_cols) = m.shape();
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            data.extend(m.row(i).iter().copied());
        }
        Self::new(n_rows, n_cols, data, Dtype::F64)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    pub fn with_dtype(mut self, dtype: Dtype) -> Self {
        self.dtype = dtype;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    /// Copies into a column-major nalgebra matrix.
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_rows, self.n_cols, &self.data)
    }

    /// Returns a new matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            dtype: self.dtype,
            source_label: self.source_label.clone(),
        }
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}
