use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::matrix::EmbeddingMatrix;
use crate::spectrum::{SingularSpectrum, SpectrumError};

/// Best-case rank-`R` approximation error, `sum_{r > R} sigma_r^2`.
pub fn tail_energy(s: &SingularSpectrum, rank: usize) -> Result<f64, AnalysisError> {
    if rank > s.len() {
        return Err(AnalysisError::RankOutOfRange {
            rank,
            len: s.len(),
        });
    }
    // Smallest first, so the tail sum is not swamped by large terms.
    Ok(s.values()[rank..].iter().rev().map(|v| v * v).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EckartYoung {
    /// Tail energy of the spectrum beyond `rank`.
    pub bound: f64,
    /// `||Y - Y_R||_F^2` for the truncated-SVD reconstruction `Y_R`.
    pub achieved: f64,
    pub rank: usize,
}

impl EckartYoung {
    pub fn relative_gap(&self) -> f64 {
        if self.bound == 0.0 && self.achieved == 0.0 {
            0.0
        } else {
            (self.achieved - self.bound).abs() / self.bound.abs().max(self.achieved.abs())
        }
    }
}

/// Reconstructs `m` from its top `rank` singular triplets and compares the
/// squared Frobenius error with the spectral tail bound.
pub fn eckart_young_check(m: &EmbeddingMatrix, rank: usize) -> Result<EckartYoung, AnalysisError> {
    let y = m.to_dmatrix();
    let min_dim = m.n_rows().min(m.n_cols());
    if rank > min_dim {
        return Err(AnalysisError::RankOutOfRange { rank, len: min_dim });
    }
    let max_iterations = (100 * min_dim).max(1000);
    let svd = y
        .clone()
        .try_svd(true, true, f64::EPSILON, max_iterations)
        .ok_or(SpectrumError::ConvergenceFailure {
            iterations: max_iterations,
        })?;
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");

    let mut approx = DMatrix::<f64>::zeros(y.nrows(), y.ncols());
    for k in 0..rank {
        approx += svd.singular_values[k] * u.column(k) * v_t.row(k);
    }
    let achieved = (&y - approx).norm_squared();

    let spectrum = SingularSpectrum::from_values(
        svd.singular_values.iter().copied().collect(),
        m.n_rows(),
        m.n_cols(),
    )?;
    Ok(EckartYoung {
        bound: tail_energy(&spectrum, rank)?,
        achieved,
        rank,
    })
}
