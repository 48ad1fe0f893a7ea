//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use qrsel::matrix::jacobi_svd;
use qrsel::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut s = 0.0;
        for t in 0..a.cols() {
            s += a[(i, t)] * b[(t, j)];
        }
        s
    })
}

/// Column `c` of the result is column `perm[c]` of `a`.
pub fn permute_cols(a: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), perm.len(), |i, c| a[(i, perm[c])])
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn lu_det(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    jacobi_svd(a).unwrap().sigma_max()
}

pub fn orthonormality_error(q: &DenseMatrix) -> f64 {
    let g = naive_matmul(&q.transpose(), q);
    g.sub(&DenseMatrix::identity(g.rows())).frobenius_norm()
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
