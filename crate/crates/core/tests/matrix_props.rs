mod common;

use common::{lu_det, naive_matmul, orthonormality_error, permute_cols, rel_close, uniform_matrix};
use proptest::prelude::*;
use qrsel::matrix::{
    column_pivoted_qr, householder_qr, jacobi_svd, kahan_matrix, numerical_rank, pseudoinverse,
};
use qrsel::DenseMatrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn householder_reconstructs(rows in 1usize..30, cols in 1usize..30, seed in any::<u64>()) {
        let a = uniform_matrix(rows, cols, seed);
        let qr = householder_qr(&a).unwrap();
        let resid = naive_matmul(&qr.q, &qr.r).sub(&a).frobenius_norm();
        prop_assert!(resid <= 1e-12 * a.frobenius_norm().max(1.0));
        prop_assert!(orthonormality_error(&qr.q) <= 1e-12 * qr.q.cols() as f64);
        prop_assert!(qr.r.is_upper_triangular(0.0));
        for i in 0..rows.min(cols) {
            prop_assert!(qr.r[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn pivoted_qr_reconstructs_permuted(rows in 1usize..30, cols in 1usize..30, seed in any::<u64>()) {
        let a = uniform_matrix(rows, cols, seed);
        let (qr, perm) = column_pivoted_qr(&a).unwrap();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..cols).collect::<Vec<_>>());
        let ap = permute_cols(&a, &perm);
        prop_assert!(naive_matmul(&qr.q, &qr.r).sub(&ap).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0));
        let d: Vec<f64> = (0..rows.min(cols)).map(|i| qr.r[(i, i)].abs()).collect();
        for w in d.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn singular_values_match_frobenius_and_det(n in 1usize..12, seed in any::<u64>()) {
        let a = uniform_matrix(n, n, seed);
        let sv = jacobi_svd(&a).unwrap().singular_values;
        let fro2: f64 = sv.iter().map(|s| s * s).sum();
        prop_assert!(rel_close(fro2, a.frobenius_norm().powi(2), 1e-12));
        let prod: f64 = sv.iter().product();
        prop_assert!((prod - lu_det(&a).abs()).abs() <= 1e-10 * prod.max(1e-300) + 1e-14);
        for w in sv.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn pinv_of_pinv(rows in 2usize..20, extra in 0usize..10, seed in any::<u64>()) {
        let a = uniform_matrix(rows + extra, rows, seed);
        let back = pseudoinverse(&pseudoinverse(&a).unwrap()).unwrap();
        prop_assert!(back.sub(&a).frobenius_norm() <= 1e-8 * a.frobenius_norm());
    }
}

#[test]
fn kahan_family_factors_cleanly() {
    for n in 2..=48 {
        for c in [0.1, 0.2, 0.285] {
            let a = kahan_matrix(n, c).unwrap();
            let (qr, perm) = column_pivoted_qr(&a).unwrap();
            let ap = permute_cols(&a, &perm);
            assert!(naive_matmul(&qr.q, &qr.r).sub(&ap).frobenius_norm() <= 1e-12 * a.frobenius_norm());
            assert!(orthonormality_error(&qr.q) <= 1e-12 * n as f64);
        }
    }
}

#[test]
fn rank_of_products() {
    for (r, seed) in [(1, 1u64), (3, 2), (7, 3)] {
        let a = naive_matmul(&uniform_matrix(20, r, seed), &uniform_matrix(r, 15, seed + 100));
        assert_eq!(numerical_rank(&a), r);
    }
    assert_eq!(numerical_rank(&DenseMatrix::zeros(4, 3)), 0);
}
