mod common;

use common::{naive_matmul, orthonormality_error, permute_cols, rel_close, spectral_norm, uniform_matrix};
use qrsel::fixtures::planted_copies;
use qrsel::matrix::{householder_qr, jacobi_svd, kahan_matrix, pseudoinverse};
use qrsel::rrqr::{all_swap_criteria, select_features_rrqr, strong_rrqr, swap_criterion, RrqrConfig, RrqrFactorization};
use qrsel::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unpermuted_factorization(a: &DenseMatrix, k: usize) -> RrqrFactorization {
    let qr = householder_qr(a).unwrap();
    RrqrFactorization {
        q: qr.q,
        r: qr.r,
        perm: (0..a.cols()).collect(),
        k,
        f: 1.1,
        swaps_performed: 0,
        certificate: 0.0,
        log_det_history: Vec::new(),
    }
}

fn abs_det_leading(r: &DenseMatrix, k: usize) -> f64 {
    (0..k).map(|i| r[(i, i)].abs()).product()
}

#[test]
fn criterion_equals_determinant_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for t in 0..100 {
        let n = rng.gen_range(3..12);
        let m = n + rng.gen_range(0..5);
        let k = rng.gen_range(1..n);
        let fact = unpermuted_factorization(&uniform_matrix(m, n, 500 + t), k);
        let i = rng.gen_range(0..k);
        let j = rng.gen_range(0..n - k);

        let mut swapped = fact.r.clone();
        swapped.swap_cols(i, k + j);
        let after = householder_qr(&swapped).unwrap().r;
        let ratio = abs_det_leading(&after, k) / abs_det_leading(&fact.r, k);
        let crit = swap_criterion(&fact, i, j).unwrap();
        assert!(rel_close(crit.sqrt(), ratio, 1e-8), "tuple {t}: {} vs {ratio}", crit.sqrt());
    }
}

fn check_strong(a: &DenseMatrix, k: usize, f: f64) {
    let fact = strong_rrqr(a, &RrqrConfig::new(k, f)).unwrap();
    let n = a.cols();
    let ap = permute_cols(a, &fact.perm);
    assert!(naive_matmul(&fact.q, &fact.r).sub(&ap).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    assert!(orthonormality_error(&fact.q) <= 1e-10 * fact.q.cols() as f64);

    let crit = all_swap_criteria(&fact).unwrap();
    assert!(crit.max_abs() <= f * f + 1e-8, "criterion {} above f²", crit.max_abs());

    let sigma_a = jacobi_svd(a).unwrap().singular_values;
    let smin_r11 = jacobi_svd(&fact.r11()).unwrap().sigma_min();
    let bound = sigma_a[k - 1] / (1.0 + f * f * (k * (n - k)) as f64).sqrt();
    assert!(smin_r11 >= bound * (1.0 - 1e-10), "{smin_r11} < {bound}");

    // ‖A − Q1·[R11 R12]·Πᵀ‖₂ equals σ_max(R22).
    let approx_perm = naive_matmul(&fact.q1(), &fact.r.block(0, k, 0, n));
    let mut approx = DenseMatrix::zeros(a.rows(), n);
    for (c, &orig) in fact.perm.iter().enumerate() {
        approx.col_mut(orig).copy_from_slice(approx_perm.col(c));
    }
    let lhs = spectral_norm(&a.sub(&approx));
    let rhs = if k < n { spectral_norm(&fact.r22()) } else { 0.0 };
    assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(a.frobenius_norm() * 1e-8), "{lhs} vs {rhs}");
}

#[test]
fn strong_certificate_bounds_and_residual() {
    for seed in 0..20u64 {
        let m = 8 + (seed as usize % 5) * 6;
        let n = 6 + (seed as usize % 4) * 5;
        let a = uniform_matrix(m, n, seed);
        let k = 1 + (seed as usize * 7) % m.min(n);
        check_strong(&a, k, 1.1);
        check_strong(&a, k, 2.0);
    }
    for n in [8, 16, 32] {
        check_strong(&kahan_matrix(n, 0.2).unwrap(), n - 1, 1.1);
    }
}

#[test]
fn blocks_reproduce_determinant() {
    for seed in 0..10u64 {
        let n = 5 + seed as usize;
        let a = uniform_matrix(n, n, 77 + seed);
        let fact = strong_rrqr(&a, &RrqrConfig::new(n / 2, 1.1)).unwrap();
        let prod11: f64 = jacobi_svd(&fact.r11()).unwrap().singular_values.iter().product();
        let prod22: f64 = jacobi_svd(&fact.r22()).unwrap().singular_values.iter().product();
        let det = common::lu_det(&a).abs();
        assert!(rel_close(prod11 * prod22, det, 1e-6));
    }
}

#[test]
fn swaps_raise_the_determinant() {
    let a = kahan_matrix(24, 0.25).unwrap();
    let fact = strong_rrqr(&a, &RrqrConfig::new(20, 1.01)).unwrap();
    assert!(fact.swaps_performed > 0);
    assert_eq!(fact.log_det_history.len(), fact.swaps_performed + 1);
    for w in fact.log_det_history.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn planted_columns_recovered() {
    for seed in 0..3u64 {
        let noise = 1e-3;
        let p = planted_copies(100, 50, 5, noise, 0.5, true, seed).unwrap();
        let sel = select_features_rrqr(&p.data, 5, 1.1).unwrap();
        assert_eq!(p.groups_covered(&sel.selected), 5);
        let basis = p.data.select_cols(&sel.selected);
        let coef = pseudoinverse(&basis).unwrap().matmul(&p.data);
        let resid = p.data.sub(&basis.matmul(&coef));
        let floor = noise * (100f64).sqrt();
        for c in 0..50 {
            let r = resid.col(c).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(r <= 10.0 * floor, "column {c}: {r}");
        }
    }
}

#[test]
fn selection_is_scale_invariant() {
    let a = uniform_matrix(30, 20, 5);
    let s1 = select_features_rrqr(&a, 6, 1.1).unwrap();
    let s2 = select_features_rrqr(&a.scale(1e6), 6, 1.1).unwrap();
    assert_eq!(s1.selected, s2.selected);
}
