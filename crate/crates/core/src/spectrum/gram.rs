//! Cross-product matrices of row-major embedding data.
//!
//! Accumulation runs over a fixed partition of row blocks and partial sums
//! are added in partition order, so results do not depend on how many
//! threads rayon uses.

use nalgebra::{DMatrix, DMatrixView};
use rayon::prelude::*;

use crate::matrix::EmbeddingMatrix;

const ROWS_PER_BLOCK: usize = 1024;
const MAX_GROUPS: usize = 8;

/// `K x K` matrix `sum_i (z_i - mu)(z_i - mu)^T` over the rows `z_i`, with
/// `mu = 0` when no mean is given.
pub(crate) fn feature_gram(m: &EmbeddingMatrix, mean: Option<&[f64]>) -> DMatrix<f64> {
    let (n, k) = m.shape();
    // Row-major N x K is column-major K x N: column i is sample i.
    let samples = DMatrixView::from_slice(m.as_slice(), k, n);

    let n_blocks = n.div_ceil(ROWS_PER_BLOCK);
    let n_groups = n_blocks.clamp(1, MAX_GROUPS);
    let partials: Vec<DMatrix<f64>> = (0..n_groups)
        .into_par_iter()
        .map(|g| {
            let first = g * n_blocks / n_groups;
            let last = (g + 1) * n_blocks / n_groups;
            let mut acc = DMatrix::<f64>::zeros(k, k);
            for b in first..last {
                let start = b * ROWS_PER_BLOCK;
                let width = ROWS_PER_BLOCK.min(n - start);
                let mut block = samples.columns(start, width).into_owned();
                if let Some(mu) = mean {
                    for mut col in block.column_iter_mut() {
                        col.iter_mut().zip(mu).for_each(|(v, m)| *v -= m);
                    }
                }
                let block_t = block.transpose();
                acc.gemm(1.0, &block, &block_t, 1.0);
            }
            acc
        })
        .collect();

    let mut iter = partials.into_iter();
    let mut total = iter.next().expect("at least one group");
    for p in iter {
        total += p;
    }
    symmetrize(&mut total);
    total
}

/// `N x N` matrix of row inner products `Z Z^T`.
pub(crate) fn sample_gram(m: &EmbeddingMatrix) -> DMatrix<f64> {
    let (n, k) = m.shape();
    let samples = DMatrixView::from_slice(m.as_slice(), k, n);
    let rows = samples.transpose();
    let mut g = &rows * samples;
    symmetrize(&mut g);
    g
}

/// Column means of `m`, summed in row order.
pub(crate) fn column_means(m: &EmbeddingMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; m.n_cols()];
    for row in m.rows() {
        sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    let n = m.n_rows() as f64;
    sums.iter_mut().for_each(|s| *s /= n);
    sums
}

fn symmetrize(g: &mut DMatrix<f64>) {
    let k = g.nrows();
    for j in 0..k {
        for i in (j + 1)..k {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, k: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect();
        EmbeddingMatrix::new(n, k, data, crate::matrix::Dtype::F64).unwrap()
    }

    #[test]
    fn feature_gram_matches_naive_across_block_boundaries() {
        let m = random(2 * ROWS_PER_BLOCK + 37, 5, 1);
        let g = feature_gram(&m, None);
        let z = m.to_dmatrix();
        let naive = z.transpose() * &z;
        assert!((g - naive).amax() < 1e-9);
    }

    #[test]
    fn centered_gram_matches_naive() {
        let m = random(300, 4, 2);
        let mu = column_means(&m);
        let g = feature_gram(&m, Some(&mu));
        let mut z = m.to_dmatrix();
        for mut row in z.row_iter_mut() {
            row.iter_mut().zip(&mu).for_each(|(v, m)| *v -= m);
        }
        let naive = z.transpose() * &z;
        assert!((g - naive).amax() < 1e-10);
    }

    #[test]
    fn sample_gram_matches_naive() {
        let m = random(6, 40, 3);
        let z = m.to_dmatrix();
        assert!((sample_gram(&m) - &z * z.transpose()).amax() < 1e-12);
    }

    #[test]
    fn independent_of_thread_count() {
        let m = random(5 * ROWS_PER_BLOCK + 11, 16, 4);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| feature_gram(&m, None));
        let b = four.install(|| feature_gram(&m, None));
        assert_eq!(a.as_slice(), b.as_slice());
    }
}
