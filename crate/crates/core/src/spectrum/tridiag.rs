//! Eigenvalues of a real symmetric matrix: blocked Householder reduction to
//! tridiagonal form, then implicit-shift QL iteration on the tridiagonal.
//!
//! The reduction works on panels of `PANEL` columns. Inside a panel only
//! matrix-vector products touch the trailing block; the accumulated update
//! `A -= V W^T + W V^T` is applied once per panel as two matrix products.

use nalgebra::DMatrix;

use super::SpectrumError;

/// Sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_VALUE: usize = 60;

const PANEL: usize = 32;

/// Eigenvalues of the symmetric matrix `a` (lower triangle is read), in no
/// particular order.
pub fn symmetric_eigenvalues(mut a: DMatrix<f64>) -> Result<Vec<f64>, SpectrumError> {
    assert!(a.is_square());
    let n = a.nrows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![a[(0, 0)]]),
        _ => {}
    }
    let scale = a.amax();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    a.unscale_mut(scale);
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.iter_mut().for_each(|v| *v *= scale);
    Ok(d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Reduces the symmetric matrix `a` (both triangles stored) to tridiagonal
/// form. Returns the diagonal and the subdiagonal, the latter padded with a
/// trailing zero to length `n`.
pub(crate) fn tridiagonalize(mut a: DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut origin = 0;
    while origin < n {
        let m = n - origin;
        let b = PANEL.min(m);
        // w is m x b, column-major, indexed in block-local rows.
        let mut w = vec![0.0f64; m * b];
        let mut t = vec![0.0f64; b];
        {
            let data = a.as_mut_slice();
            // Block-local element (r, c) lives at at(r, c).
            let at = |r: usize, c: usize| (origin + c) * n + origin + r;
            for i in 0..b {
                // Bring column i up to date with the panel's earlier reflectors.
                for j in 0..i {
                    let (wij, aij) = (w[j * m + i], data[at(i, j)]);
                    for r in i..m {
                        data[at(r, i)] -= data[at(r, j)] * wij + w[j * m + r] * aij;
                    }
                }
                d[origin + i] = data[at(i, i)];
                if i + 1 >= m {
                    break;
                }

                // Reflector annihilating rows i+2.. of column i.
                let col = at(i + 1, i);
                let alpha = data[col];
                let xnorm = dot(&data[col + 1..col + m - i - 1], &data[col + 1..col + m - i - 1]).sqrt();
                let tau = if xnorm == 0.0 {
                    e[origin + i] = alpha;
                    0.0
                } else {
                    let beta = -alpha.hypot(xnorm).copysign(alpha);
                    let inv = 1.0 / (alpha - beta);
                    data[col + 1..col + m - i - 1].iter_mut().for_each(|x| *x *= inv);
                    e[origin + i] = beta;
                    (beta - alpha) / beta
                };
                data[col] = 1.0;

                // w_i = tau (A v - V (W^T v) - W (V^T v)), then the rank-2
                // symmetric correction.
                let len = m - i - 1;
                let v: Vec<f64> = data[col..col + len].to_vec();
                // Symmetric product reading only the lower triangle.
                let mut wi = vec![0.0f64; len];
                for c in 0..len {
                    let start = at(i + 1 + c, i + 1 + c);
                    let lower = &data[start..start + len - c];
                    wi[c] += dot(lower, &v[c..]);
                    let vc = v[c];
                    wi[c + 1..].iter_mut().zip(&lower[1..]).for_each(|(o, x)| *o += x * vc);
                }
                for j in 0..i {
                    t[j] = dot(&w[j * m + i + 1..j * m + m], &v);
                }
                for j in 0..i {
                    let vj = &data[at(i + 1, j)..at(i + 1, j) + len];
                    wi.iter_mut().zip(vj).for_each(|(o, x)| *o -= x * t[j]);
                }
                for j in 0..i {
                    t[j] = dot(&data[at(i + 1, j)..at(i + 1, j) + len], &v);
                }
                for j in 0..i {
                    let wj = &w[j * m + i + 1..j * m + m];
                    wi.iter_mut().zip(wj).for_each(|(o, x)| *o -= x * t[j]);
                }
                wi.iter_mut().for_each(|x| *x *= tau);
                let correction = -0.5 * tau * dot(&wi, &v);
                wi.iter_mut().zip(&v).for_each(|(o, x)| *o += correction * x);
                w[i * m + i + 1..i * m + m].copy_from_slice(&wi);
            }
        }

        let rest = m - b;
        if rest > 0 {
            let v = a.view((origin + b, origin), (rest, b)).into_owned();
            let wb = DMatrix::from_fn(rest, b, |r, c| w[c * m + b + r]);
            let mut trailing = a.view_mut((origin + b, origin + b), (rest, rest));
            trailing.gemm(-1.0, &v, &wb.transpose(), 1.0);
            trailing.gemm(-1.0, &wb, &v.transpose(), 1.0);
        }
        origin += b;
    }
    (d, e)
}

/// In-place implicit QL on the tridiagonal with diagonal `d` and
/// subdiagonal `e[0..n-1]` (`e[n-1]` is scratch). On return `d` holds the
/// eigenvalues.
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectrumError> {
    let n = d.len();
    debug_assert_eq!(e.len(), n);
    // Reduction already costs eps * ||T|| absolute error, so splitting at that
    // level loses nothing and lets clusters near zero deflate.
    let norm = (0..n).fold(0.0f64, |acc, i| acc.max(d[i].abs() + e[i].abs()));
    let floor = f64::EPSILON * norm;
    let mut total_iterations = 0usize;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a small subdiagonal element to split the problem.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= (f64::EPSILON * dd).max(floor) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_iterations += 1;
            if iter > MAX_SWEEPS_PER_VALUE {
                return Err(SpectrumError::ConvergenceFailure {
                    iterations: total_iterations,
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
