//! End-to-end rank estimation: subsample, spectrum, metrics.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ingest::{subsample_rows, DEFAULT_SAMPLES};
use crate::matrix::EmbeddingMatrix;
use crate::metrics::{alpha_req_fit, classical_rank, rankme, AlphaSource, MetricConfig, RankReport};
use crate::spectrum::{covariance_eigenvalues, singular_values, SpectrumPath};

/// How the spectrum path is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathChoice {
    #[default]
    Auto,
    Direct,
    Gram,
}

impl PathChoice {
    pub fn resolve(self, n_rows: usize, n_cols: usize) -> SpectrumPath {
        match self {
            PathChoice::Auto => SpectrumPath::auto(n_rows, n_cols),
            PathChoice::Direct => SpectrumPath::Direct,
            PathChoice::Gram => SpectrumPath::Gram,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOptions {
    pub samples: usize,
    pub seed: u64,
    pub path: PathChoice,
    /// Entropy epsilon; `None` keeps the default.
    pub entropy_epsilon: Option<f64>,
    /// Threshold-rank epsilon; `None` derives it from the input dtype.
    pub threshold_epsilon: Option<f64>,
    /// Fit alpha on this spectrum when set.
    pub alpha: Option<AlphaSource>,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            path: PathChoice::Auto,
            entropy_epsilon: None,
            threshold_epsilon: None,
            alpha: None,
        }
    }
}

impl RankOptions {
    pub fn metric_config(&self, m: &EmbeddingMatrix) -> MetricConfig {
        let mut cfg = MetricConfig::for_dtype(m.dtype());
        if let Some(eps) = self.entropy_epsilon {
            cfg.entropy_epsilon = eps;
        }
        if let Some(eps) = self.threshold_epsilon {
            cfg.threshold_epsilon = eps;
        }
        cfg
    }
}

/// Computes RankMe, the threshold rank and optionally alpha for `m`.
pub fn rank_report(m: &EmbeddingMatrix, opts: &RankOptions) -> Result<RankReport, Error> {
    let cfg = opts.metric_config(m);
    let sub = subsample_rows(m, opts.samples.max(1), opts.seed);
    let path = opts.path.resolve(sub.n_rows(), sub.n_cols());
    let spectrum = singular_values(&sub, path)?;

    let (alpha, alpha_r_squared) = match opts.alpha {
        Some(source) => {
            let eig = covariance_eigenvalues(&sub, source == AlphaSource::CenteredCovariance)?;
            let fit = alpha_req_fit(&eig, &cfg)?;
            (Some(fit.alpha), Some(fit.r_squared))
        }
        None => (None, None),
    };

    Ok(RankReport {
        rankme: rankme(&spectrum, &cfg),
        classical_rank: classical_rank(&spectrum, &cfg),
        alpha,
        alpha_r_squared,
        alpha_source: opts.alpha,
        n_used: sub.n_rows(),
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        spectrum_path: path,
        config: cfg,
    })
}
