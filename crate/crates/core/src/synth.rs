//! Seeded synthetic matrices for tests, benchmarks and calibration runs.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{Dtype, EmbeddingMatrix};

const ROWS_PER_BLOCK: usize = 2048;

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// `n x k` matrix of i.i.d. standard normals.
pub fn gaussian_matrix(n: usize, k: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EmbeddingMatrix::new(n, k, normals(&mut rng, n * k), Dtype::F64)
        .expect("normal samples are finite")
}

/// `A B + noise * E` with `A` (`n x rank`), `B` (`rank x k`) and `E` i.i.d.
/// standard normal. With `noise = 0` the rank is exactly `min(rank, n, k)`
/// almost surely.
///
/// Rows are produced block by block so only the output is held in memory.
pub fn planted_rank(n: usize, k: usize, rank: usize, noise: f64, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Row-major n x k is column-major k x n, so build Z^T = B^T A^T.
    let b_t = DMatrix::from_vec(k, rank, normals(&mut rng, k * rank));
    let mut data = Vec::with_capacity(n * k);
    let mut start = 0;
    while start < n {
        let rows = ROWS_PER_BLOCK.min(n - start);
        let a_t = DMatrix::from_vec(rank, rows, normals(&mut rng, rank * rows));
        let block = &b_t * a_t;
        data.extend_from_slice(block.as_slice());
        start += rows;
    }
    if noise != 0.0 {
        for v in data.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += noise * e;
        }
    }
    EmbeddingMatrix::new(n, k, data, Dtype::F64).expect("finite by construction")
}

/// Haar-distributed `n x n` orthogonal matrix (QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_vec(n, n, normals(&mut rng, n * n));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(17, 1);
        let eye = q.transpose() * &q;
        assert!((eye - DMatrix::identity(17, 17)).amax() < 1e-12);
    }

    #[test]
    fn planted_rank_shape_and_determinism() {
        let a = planted_rank(3000, 12, 4, 0.0, 9);
        let b = planted_rank(3000, 12, 4, 0.0, 9);
        assert_eq!(a.shape(), (3000, 12));
        assert_eq!(a, b);
        let svd = a.to_dmatrix().singular_values();
        assert!(svd[3] > 1e-3 * svd[0]);
        assert!(svd[4] < 1e-10 * svd[0]);
    }
}
