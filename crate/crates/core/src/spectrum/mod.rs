//! Singular spectra of embedding matrices and covariance eigenspectra.
//!
//! Two interchangeable routes produce the singular values:
//!
//! * [`SpectrumPath::Direct`] runs a full SVD on the `N x K` matrix.
//! * [`SpectrumPath::Gram`] forms the smaller of `Z^T Z` / `Z Z^T`, takes its
//!   eigenvalues, clamps round-off negatives to zero and takes square roots.
//!   For tall matrices such as 25,600 x 2,048 this turns the problem into a
//!   2,048 x 2,048 symmetric eigenproblem.
//!
//! The Gram route squares the condition number, so singular values below
//! roughly `sqrt(max(N, K) * eps_f64) * sigma_max` carry no information on that
//! path. They are flushed to zero there, and [`SingularSpectrum::resolution`]
//! records the floor.

mod gram;
mod tridiag;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tridiag::symmetric_eigenvalues;

use crate::matrix::EmbeddingMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("eigensolver did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("centered covariance needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumPath {
    Direct,
    Gram,
}

impl SpectrumPath {
    /// Gram when `min(N, K) <= N / 4`, Direct otherwise.
    pub fn auto(n_rows: usize, n_cols: usize) -> Self {
        if 4 * n_rows.min(n_cols) <= n_rows {
            SpectrumPath::Gram
        } else {
            SpectrumPath::Direct
        }
    }
}

/// Nonincreasing, nonnegative singular values of an `n_rows x n_cols` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    path: SpectrumPath,
    resolution: f64,
}

impl SingularSpectrum {
    /// Wraps externally computed singular values. Values are sorted
    /// nonincreasing and tiny negatives clamped to zero; the length must equal
    /// `min(n_rows, n_cols)`.
    pub fn from_values(
        mut values: Vec<f64>,
        n_rows: usize,
        n_cols: usize,
    ) -> Result<Self, SpectrumError> {
        if values.len() != n_rows.min(n_cols) {
            return Err(SpectrumError::InvalidSpectrum(format!(
                "{} values for a {n_rows}x{n_cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectrumError::InvalidSpectrum("non-finite value".into()));
        }
        clamp_and_sort(&mut values);
        Ok(Self {
            values,
            n_rows,
            n_cols,
            path: SpectrumPath::Direct,
            resolution: 0.0,
        })
    }

    /// Spectrum of a square matrix whose singular values are `values`.
    pub fn square(values: Vec<f64>) -> Result<Self, SpectrumError> {
        let n = values.len();
        Self::from_values(values, n, n)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn path(&self) -> SpectrumPath {
        self.path
    }

    /// Relative floor below which values are round-off on the path used.
    /// Zero for the direct SVD.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Multiplies every value by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// Eigenvalues of a `K x K` second-moment matrix, nonincreasing and clamped at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    centered: bool,
}

impl EigenSpectrum {
    pub fn from_values(mut values: Vec<f64>, centered: bool) -> Result<Self, SpectrumError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectrumError::InvalidSpectrum("non-finite value".into()));
        }
        clamp_and_sort(&mut values);
        Ok(Self { values, centered })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

fn clamp_and_sort(values: &mut [f64]) {
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    values.sort_by(|a, b| b.total_cmp(a));
}

/// Singular values of `m` along the requested path. No centering is applied.
pub fn singular_values(
    m: &EmbeddingMatrix,
    path: SpectrumPath,
) -> Result<SingularSpectrum, SpectrumError> {
    let (n, k) = m.shape();
    let (mut values, resolution) = match path {
        SpectrumPath::Direct => (direct_singular_values(m)?, 0.0),
        SpectrumPath::Gram => {
            let g = if k <= n {
                gram::feature_gram(m, None)
            } else {
                gram::sample_gram(m)
            };
            let mut ev = symmetric_eigenvalues(g)?;
            ev.iter_mut().for_each(|v| *v = v.max(0.0).sqrt());
            let resolution = (n.max(k) as f64 * f64::EPSILON).sqrt();
            // Below the floor the values are round-off noise of order
            // sqrt(eps) * sigma_max; left in, they would inflate the entropy.
            let floor = resolution * ev.iter().fold(0.0f64, |m, &v| m.max(v));
            ev.iter_mut().filter(|v| **v < floor).for_each(|v| *v = 0.0);
            (ev, resolution)
        }
    };
    clamp_and_sort(&mut values);
    Ok(SingularSpectrum {
        values,
        n_rows: n,
        n_cols: k,
        path,
        resolution,
    })
}

/// [`singular_values`] with the path picked by [`SpectrumPath::auto`].
pub fn singular_values_auto(m: &EmbeddingMatrix) -> Result<SingularSpectrum, SpectrumError> {
    singular_values(m, SpectrumPath::auto(m.n_rows(), m.n_cols()))
}

fn direct_singular_values(m: &EmbeddingMatrix) -> Result<Vec<f64>, SpectrumError> {
    let min_dim = m.n_rows().min(m.n_cols());
    let max_iterations = (100 * min_dim).max(1000);
    let svd = m
        .to_dmatrix()
        .try_svd(false, false, f64::EPSILON, max_iterations)
        .ok_or(SpectrumError::ConvergenceFailure {
            iterations: max_iterations,
        })?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Eigenvalues of `(1/(N-1)) (Z - mean)^T (Z - mean)` when `center`, else of
/// `(1/N) Z^T Z`. Always `K` values.
pub fn covariance_eigenvalues(
    m: &EmbeddingMatrix,
    center: bool,
) -> Result<EigenSpectrum, SpectrumError> {
    let n = m.n_rows();
    let (g, denom) = if center {
        if n < 2 {
            return Err(SpectrumError::TooFewRows(n));
        }
        let mu = gram::column_means(m);
        (gram::feature_gram(m, Some(&mu)), (n - 1) as f64)
    } else {
        (gram::feature_gram(m, None), n as f64)
    };
    let mut values = symmetric_eigenvalues(g)?;
    values.iter_mut().for_each(|v| *v /= denom);
    EigenSpectrum::from_values(values, center)
}
