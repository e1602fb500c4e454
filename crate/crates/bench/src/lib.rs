//! Shared inputs for the criterion benches.

use rankgauge::spectrum::{EigenSpectrum, SingularSpectrum};
use rankgauge::synth::planted_rank;
use rankgauge::EmbeddingMatrix;

/// Planted low-rank embeddings with a little isotropic noise, so every
/// spectrum path has a non-trivial tail to resolve.
pub fn embeddings(n: usize, k: usize) -> EmbeddingMatrix {
    planted_rank(n, k, k / 4 + 1, 1e-3, 42)
}

/// Power-law spectrum `i^-decay`, `len` values.
pub fn power_law(len: usize, decay: f64) -> Vec<f64> {
    (1..=len).map(|i| (i as f64).powf(-decay)).collect()
}

pub fn singular_spectrum(len: usize) -> SingularSpectrum {
    SingularSpectrum::square(power_law(len, 0.5)).expect("positive, finite values")
}

pub fn eigen_spectrum(len: usize) -> EigenSpectrum {
    EigenSpectrum::from_values(power_law(len, 1.0), true).expect("positive, finite values")
}
