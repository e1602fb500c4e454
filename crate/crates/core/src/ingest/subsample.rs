use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::EmbeddingMatrix;

/// Rows used for rank estimation unless the caller asks otherwise.
pub const DEFAULT_SAMPLES: usize = 25_600;

/// Sorted row indices of an `n`-row draw without replacement from `n_rows`
/// rows. Returns every index when `n >= n_rows`.
pub fn subsample_indices(n_rows: usize, n: usize, seed: u64) -> Vec<usize> {
    if n >= n_rows {
        return (0..n_rows).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n_rows, n).into_vec();
    idx.sort_unstable();
    idx
}

/// Draws `n` rows uniformly without replacement, keeping their original
/// relative order. Deterministic for a given `(m, n, seed)`; returns a clone
/// of `m` when `n >= N`.
///
/// # Panics
/// If `n == 0`.
pub fn subsample_rows(m: &EmbeddingMatrix, n: usize, seed: u64) -> EmbeddingMatrix {
    assert!(n >= 1, "subsample size must be positive");
    if n >= m.n_rows() {
        return m.clone();
    }
    m.select_rows(&subsample_indices(m.n_rows(), n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashMap};

    fn counting_matrix(n_rows: usize) -> EmbeddingMatrix {
        let rows: Vec<[f64; 1]> = (0..n_rows).map(|i| [i as f64]).collect();
        EmbeddingMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn cap_larger_than_rows_keeps_everything() {
        let m = counting_matrix(10);
        let s = subsample_rows(&m, DEFAULT_SAMPLES, 3);
        assert_eq!(s, m);
    }

    #[test]
    fn same_seed_same_rows() {
        let a = subsample_indices(50_000, DEFAULT_SAMPLES, 42);
        let b = subsample_indices(50_000, DEFAULT_SAMPLES, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), DEFAULT_SAMPLES);
        let unique: BTreeSet<_> = a.iter().collect();
        assert_eq!(unique.len(), DEFAULT_SAMPLES);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a, subsample_indices(50_000, DEFAULT_SAMPLES, 43));
    }

    #[test]
    fn two_of_four_is_uniform_over_pairs() {
        // Chi-square over the 6 possible 2-subsets, 5 degrees of freedom.
        // 15.086 is the 0.99 quantile, so passing means p > 0.01.
        const DRAWS: u64 = 10_000;
        const CRITICAL: f64 = 15.086;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for seed in 0..DRAWS {
            *counts.entry(subsample_indices(4, 2, seed)).or_default() += 1;
        }
        assert_eq!(counts.len(), 6, "every pair must appear: {counts:?}");
        let expected = DRAWS as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < CRITICAL, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn subsample_keeps_columns_and_source_rows() {
        let m = counting_matrix(100);
        let s = subsample_rows(&m, 7, 1);
        assert_eq!(s.shape(), (7, 1));
        let idx = subsample_indices(100, 7, 1);
        for (r, &i) in idx.iter().enumerate() {
            assert_eq!(s.get(r, 0), i as f64);
        }
    }
}
