use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::ingest::subsample_rows;
use crate::matrix::EmbeddingMatrix;
use crate::metrics::{rankme, MetricConfig};
use crate::spectrum::singular_values_auto;

/// RankMe as a function of the number of rows used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub sample_sizes: Vec<usize>,
    pub rankme_values: Vec<f64>,
    /// RankMe on all `N` rows.
    pub full_value: f64,
    pub n_rows: usize,
    pub seed: u64,
}

impl ConvergenceCurve {
    /// One row per point under a `size,rankme` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,rankme\n");
        for (n, v) in self.sample_sizes.iter().zip(&self.rankme_values) {
            out.push_str(&format!("{n},{v}\n"));
        }
        out
    }

    /// Each value as a fraction of the full-matrix value.
    pub fn relative_values(&self) -> Vec<f64> {
        self.rankme_values
            .iter()
            .map(|v| v / self.full_value)
            .collect()
    }
}

fn seed_for_size(seed: u64, size: usize) -> u64 {
    seed ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Computes RankMe on an independent, seed-deterministic subsample for each
/// size. Sizes must be strictly increasing and at most `N`.
pub fn convergence_curve(
    m: &EmbeddingMatrix,
    sizes: &[usize],
    seed: u64,
    cfg: &MetricConfig,
) -> Result<ConvergenceCurve, AnalysisError> {
    let n = m.n_rows();
    if sizes.is_empty() {
        return Err(AnalysisError::InvalidSizes("no sizes given".into()));
    }
    if sizes[0] == 0 {
        return Err(AnalysisError::InvalidSizes("sizes must be positive".into()));
    }
    if let Some(w) = sizes.windows(2).find(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidSizes(format!(
            "sizes must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    let largest = *sizes.last().unwrap();
    if largest > n {
        return Err(AnalysisError::InvalidSizes(format!(
            "largest size {largest} exceeds the {n} available rows"
        )));
    }

    let full_value = rankme(&singular_values_auto(m)?, cfg);
    let rankme_values = sizes
        .par_iter()
        .map(|&size| {
            if size == n {
                return Ok(full_value);
            }
            let sub = subsample_rows(m, size, seed_for_size(seed, size));
            Ok(rankme(&singular_values_auto(&sub)?, cfg))
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()?;

    Ok(ConvergenceCurve {
        sample_sizes: sizes.to_vec(),
        rankme_values,
        full_value,
        n_rows: n,
        seed,
    })
}
