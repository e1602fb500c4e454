//! Rank measures computed from a spectrum.
//!
//! * [`rankme`]: exponential of the Shannon entropy of the L1-normalized
//!   singular values, `exp(-sum_k p_k ln p_k)` with `p_k = sigma_k / ||sigma||_1 + eps`.
//!   The epsilon is added without renormalizing.
//! * [`classical_rank`]: number of singular values above
//!   `max(sigma) * max(N, K) * eps`.
//! * [`alpha_req_fit`]: power-law decay exponent of an eigenspectrum,
//!   `lambda_i ~ i^-alpha`, by least squares in log-log space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Dtype;
use crate::spectrum::{EigenSpectrum, SingularSpectrum, SpectrumPath};

pub const DEFAULT_ENTROPY_EPSILON: f64 = 1e-7;
pub const F32_THRESHOLD_EPSILON: f64 = 1e-7;
pub const F64_THRESHOLD_EPSILON: f64 = f64::EPSILON;

/// Eigenvalues below `max * DEFAULT_FIT_FLOOR` are left out of the default
/// alpha fit range.
pub const DEFAULT_FIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("alpha fit needs at least 2 positive eigenvalues in range, found {found}")]
    InsufficientPositiveEigenvalues { found: usize },
    #[error("alpha fit is degenerate: all log-indices coincide")]
    DegenerateFit,
    #[error("invalid fit range: {0}")]
    InvalidFitRange(String),
}

/// Inclusive, 1-based index range used by the alpha fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Added to every normalized singular value inside the entropy.
    pub entropy_epsilon: f64,
    /// Relative tolerance of the threshold rank.
    pub threshold_epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit_range: Option<FitRange>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self::for_dtype(Dtype::F32)
    }
}

impl MetricConfig {
    /// Defaults whose threshold epsilon matches the precision the
    /// embeddings were stored in.
    pub fn for_dtype(dtype: Dtype) -> Self {
        Self {
            entropy_epsilon: DEFAULT_ENTROPY_EPSILON,
            threshold_epsilon: match dtype {
                Dtype::F32 => F32_THRESHOLD_EPSILON,
                Dtype::F64 => F64_THRESHOLD_EPSILON,
            },
            fit_range: None,
        }
    }

    pub fn with_entropy_epsilon(mut self, eps: f64) -> Self {
        self.entropy_epsilon = eps;
        self
    }

    pub fn with_threshold_epsilon(mut self, eps: f64) -> Self {
        self.threshold_epsilon = eps;
        self
    }

    pub fn with_fit_range(mut self, start: usize, end: usize) -> Self {
        self.fit_range = Some(FitRange { start, end });
        self
    }
}

/// Smooth (entropy) rank of a singular spectrum.
///
/// Zero-probability terms contribute nothing. A zero spectrum with zero
/// epsilon has rank 0.
pub fn rankme(s: &SingularSpectrum, cfg: &MetricConfig) -> f64 {
    let eps = cfg.entropy_epsilon;
    if eps > 0.0 && !s.is_empty() && eps >= 1.0 / s.len() as f64 {
        log::warn!(
            "entropy epsilon {eps} is not small against 1/min(N,K) = {}",
            1.0 / s.len() as f64
        );
    }
    let norm = compensated_sum(s.values().iter().copied());
    if norm == 0.0 && eps == 0.0 {
        return 0.0;
    }
    let entropy = compensated_sum(s.values().iter().map(|&sigma| {
        let p = if norm > 0.0 { sigma / norm } else { 0.0 } + eps;
        if p > 0.0 {
            -p * p.ln()
        } else {
            0.0
        }
    }));
    entropy.exp()
}

/// Count of singular values strictly above
/// `max(sigma) * max(N, K) * threshold_epsilon`.
///
/// On the Gram path the cutoff is never set below the path's resolution, since
/// smaller values there are indistinguishable from round-off.
pub fn classical_rank(s: &SingularSpectrum, cfg: &MetricConfig) -> usize {
    let max = s.max();
    if max == 0.0 {
        return 0;
    }
    let relative = (s.n_rows().max(s.n_cols()) as f64 * cfg.threshold_epsilon).max(s.resolution());
    let cutoff = max * relative;
    s.values().iter().filter(|&&v| v > cutoff).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    /// Negated log-log slope, never negative.
    pub alpha: f64,
    /// Coefficient of determination of the log-log fit. Low values flag
    /// spectra that are not power laws, e.g. collapsed embeddings.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fits `ln lambda_i = c - alpha ln i` by ordinary least squares.
///
/// Without an explicit [`FitRange`] every index with
/// `lambda_i > max(lambda) * 1e-12` takes part, starting at `i = 1`.
pub fn alpha_req_fit(e: &EigenSpectrum, cfg: &MetricConfig) -> Result<AlphaFit, MetricsError> {
    let values = e.values();
    let (first, last) = match cfg.fit_range {
        Some(FitRange { start, end }) => {
            if start == 0 || start > end {
                return Err(MetricsError::InvalidFitRange(format!(
                    "need 1 <= start <= end, got {start}..={end}"
                )));
            }
            if start > values.len() {
                return Err(MetricsError::InvalidFitRange(format!(
                    "start {start} exceeds spectrum length {}",
                    values.len()
                )));
            }
            (start, end.min(values.len()))
        }
        None => (1, values.len()),
    };
    let floor = match cfg.fit_range {
        Some(_) => 0.0,
        None => values.first().copied().unwrap_or(0.0) * DEFAULT_FIT_FLOOR,
    };

    let points: Vec<(f64, f64)> = (first..=last)
        .filter_map(|i| {
            let lambda = values[i - 1];
            (lambda > floor && lambda > 0.0).then(|| ((i as f64).ln(), lambda.ln()))
        })
        .collect();
    if points.len() < 2 {
        return Err(MetricsError::InsufficientPositiveEigenvalues {
            found: points.len(),
        });
    }

    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &points {
        let (dx, dy) = (x - x_mean, y - y_mean);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let residual: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (y_mean + slope * (x - x_mean));
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - residual / syy };
    Ok(AlphaFit {
        alpha: (-slope).max(0.0),
        r_squared,
        n_points: points.len(),
    })
}

/// Which second-moment spectrum the alpha fit runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    /// Eigenvalues of the mean-centered covariance.
    #[default]
    CenteredCovariance,
    /// Eigenvalues of `Z^T Z / N`, i.e. squared singular values of the raw
    /// embeddings up to scale.
    RawSecondMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rankme: f64,
    pub classical_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_r_squared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_source: Option<AlphaSource>,
    /// Rows the spectrum was computed on.
    pub n_used: usize,
    /// Rows in the input before subsampling.
    pub n_rows: usize,
    pub n_cols: usize,
    pub spectrum_path: SpectrumPath,
    pub config: MetricConfig,
}

/// Neumaier summation; keeps the entropy stable for long flat spectra.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64) -> MetricConfig {
        MetricConfig::default().with_entropy_epsilon(eps)
    }

    fn spectrum_of(values: &[f64]) -> SingularSpectrum {
        SingularSpectrum::square(values.to_vec()).unwrap()
    }

    #[test]
    fn uniform_spectrum_has_full_rank() {
        let r = rankme(&spectrum_of(&[1.0, 1.0, 1.0, 1.0]), &cfg(0.0));
        assert!((r - 4.0).abs() < 1e-14, "{r}");
    }

    #[test]
    fn point_mass_has_rank_one() {
        assert_eq!(rankme(&spectrum_of(&[1.0, 0.0, 0.0, 0.0]), &cfg(0.0)), 1.0);
    }

    #[test]
    fn epsilon_perturbation_on_two_values() {
        // Direct evaluation: p = 0.5 + 1e-7 for both, H = -2 p ln p.
        let p: f64 = 0.5 + 1e-7;
        let expected = (-2.0 * p * p.ln()).exp();
        let r = rankme(&spectrum_of(&[0.5, 0.5]), &cfg(1e-7));
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 2.0).abs() < 1e-5);
    }

    #[test]
    fn epsilon_is_not_renormalized_on_wide_uniform_spectra() {
        // Frozen 40-digit mpmath values of exp(-K p ln p), p = 1/K + 1e-7.
        for (k, expected) in [
            (64usize, 64.001_293_890_279_36),
            (512, 512.137_337_282_142_2),
            (2048, 2_050.780_409_310_037),
        ] {
            let r = rankme(&SingularSpectrum::square(vec![1.0; k]).unwrap(), &cfg(1e-7));
            assert!(((r - expected) / expected).abs() < 1e-12, "K={k}: {r}");
        }
    }

    #[test]
    fn geometric_spectrum_matches_closed_form() {
        // sigma_k = 2^-k, k = 1..20. With S = 1 - 2^-20 and p_k = 2^-k / S,
        // H = ln2 * sum(k p_k) + ln S, and sum_{k<=20} k 2^-k = 2 - 22 * 2^-20
        // exactly. Every term below is exact in f64 except the two logs.
        let values: Vec<f64> = (1..=20).map(|k| 0.5f64.powi(k)).collect();
        let s_total = 1.0 - 0.5f64.powi(20);
        let weighted = 2.0 - 22.0 * 0.5f64.powi(20);
        let entropy = std::f64::consts::LN_2 * weighted / s_total + s_total.ln();
        let expected = entropy.exp();
        let r = rankme(&SingularSpectrum::square(values).unwrap(), &cfg(0.0));
        assert!(((r - expected) / expected).abs() < 1e-10, "{r} vs {expected}");
        // Frozen from a 40-digit mpmath evaluation of the entropy sum.
        const HIGH_PRECISION: f64 = 3.999_943_302_719_221_6;
        assert!(((r - HIGH_PRECISION) / HIGH_PRECISION).abs() < 1e-10, "{r}");
    }

    #[test]
    fn zero_spectrum() {
        assert_eq!(rankme(&spectrum_of(&[0.0, 0.0]), &cfg(0.0)), 0.0);
        let r = rankme(&spectrum_of(&[0.0, 0.0]), &cfg(1e-7));
        let expected = (-2.0 * 1e-7 * 1e-7f64.ln()).exp();
        assert!((r - expected).abs() < 1e-15);
        assert_eq!(classical_rank(&spectrum_of(&[0.0, 0.0, 0.0]), &cfg(0.0)), 0);
    }

    #[test]
    fn threshold_rank_arithmetic() {
        let s = spectrum_of(&[1.0, 0.5, 2.9e-7]);
        let c = MetricConfig::default().with_threshold_epsilon(1e-7);
        assert_eq!(classical_rank(&s, &c), 2);
        let s = spectrum_of(&[1.0, 0.5, 3.1e-7]);
        assert_eq!(classical_rank(&s, &c), 3);
    }

    #[test]
    fn dtype_keyed_threshold() {
        assert_eq!(MetricConfig::for_dtype(Dtype::F32).threshold_epsilon, 1e-7);
        assert_eq!(MetricConfig::for_dtype(Dtype::F64).threshold_epsilon, 2.220446049250313e-16);
        assert_eq!(MetricConfig::default().entropy_epsilon, 1e-7);
    }

    fn eig(values: Vec<f64>) -> EigenSpectrum {
        EigenSpectrum::from_values(values, true).unwrap()
    }

    #[test]
    fn alpha_exact_power_laws() {
        let harmonic = eig((1..=100).map(|i| 1.0 / i as f64).collect());
        let fit = alpha_req_fit(&harmonic, &MetricConfig::default()).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 100);

        let flat = eig(vec![3.7; 50]);
        let fit = alpha_req_fit(&flat, &MetricConfig::default()).unwrap();
        assert!(fit.alpha.abs() < 1e-12, "{}", fit.alpha);

        let root = eig((1..=200).map(|i| 7.0 * (i as f64).powf(-0.5)).collect());
        let fit = alpha_req_fit(&root, &MetricConfig::default()).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-9);
    }

    #[test]
    fn alpha_fit_range_and_errors() {
        let mut values: Vec<f64> = (1..=10).map(|i| (i as f64).powi(-2)).collect();
        values.extend([0.0; 5]);
        let e = eig(values);
        let fit = alpha_req_fit(&e, &MetricConfig::default()).unwrap();
        assert_eq!(fit.n_points, 10);
        assert!((fit.alpha - 2.0).abs() < 1e-9);

        let fit = alpha_req_fit(&e, &MetricConfig::default().with_fit_range(2, 15)).unwrap();
        assert_eq!(fit.n_points, 9);

        assert_eq!(
            alpha_req_fit(&e, &MetricConfig::default().with_fit_range(10, 15)).unwrap_err(),
            MetricsError::InsufficientPositiveEigenvalues { found: 1 }
        );
        assert!(matches!(
            alpha_req_fit(&e, &MetricConfig::default().with_fit_range(0, 3)),
            Err(MetricsError::InvalidFitRange(_))
        ));
        assert_eq!(
            alpha_req_fit(&eig(vec![1.0, 0.0, 0.0]), &MetricConfig::default()).unwrap_err(),
            MetricsError::InsufficientPositiveEigenvalues { found: 1 }
        );
    }
}
