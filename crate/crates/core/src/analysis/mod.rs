//! Validation studies around the rank measures: how fast estimates converge
//! with sample count, how ranks on one dataset track ranks on another, and
//! the Eckart-Young tail-energy bound.

mod convergence;
mod correlation;
mod eckart_young;

use thiserror::Error;

pub use convergence::{convergence_curve, ConvergenceCurve};
pub use correlation::{
    correlation_report, parse_pairs_csv, pearson, rank_transfer_report, CorrelationReport,
    LabeledPair,
};
pub use eckart_young::{eckart_young_check, tail_energy, EckartYoung};

use crate::spectrum::SpectrumError;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("labels do not match one-to-one: {0}")]
    LabelMismatch(String),
    #[error("invalid sample sizes: {0}")]
    InvalidSizes(String),
    #[error("truncation rank {rank} exceeds spectrum length {len}")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("cannot parse pairs: {0}")]
    Parse(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}
