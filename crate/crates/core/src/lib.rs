//! Effective-rank measurement for embedding matrices.
//!
//! The crate computes the singular spectrum of an `N x K` embedding matrix
//! and derives rank measures from it:
//!
//! * RankMe, the exponential of the entropy of the L1-normalized singular
//!   values ([`metrics::rankme`]),
//! * the classical threshold rank ([`metrics::classical_rank`]),
//! * the alpha exponent of the eigenspectrum's power-law decay
//!   ([`metrics::alpha_req_fit`]).
//!
//! On top of those it selects hyperparameters from a sweep of training runs
//! without labels ([`selection`]) and provides the validation studies in
//! [`analysis`].
//!
//! ```
//! use rankgauge::{metrics, spectrum, EmbeddingMatrix, MetricConfig};
//!
//! let z = EmbeddingMatrix::from_rows(&[[3.0, 0.0], [0.0, 4.0], [0.0, 0.0]]).unwrap();
//! let s = spectrum::singular_values_auto(&z).unwrap();
//! let cfg = MetricConfig::default().with_entropy_epsilon(0.0);
//! let r = metrics::rankme(&s, &cfg);
//! assert!(r > 1.9 && r < 2.0);
//! assert_eq!(metrics::classical_rank(&s, &cfg), 2);
//! ```

pub mod analysis;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod selection;
pub mod spectrum;
pub mod synth;

pub use analysis::{ConvergenceCurve, CorrelationReport};
pub use error::{Error, Result};
pub use ingest::{RunManifest, RunRecord};
pub use matrix::{Dtype, EmbeddingMatrix};
pub use metrics::{MetricConfig, RankReport};
pub use pipeline::{rank_report, PathChoice, RankOptions};
pub use selection::SelectionResult;
pub use spectrum::{EigenSpectrum, SingularSpectrum, SpectrumPath};
