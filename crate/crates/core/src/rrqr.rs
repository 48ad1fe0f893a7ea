//! Strong rank-revealing QR and feature selection from its permutation.
//!
//! Starting from a column-pivoted QR, columns `i < k` and `k + j` are swapped
//! while some pair satisfies
//!
//! ```text
//! (R11⁻¹·R12)[i, j]² + (γ_j(R22) · ω_i(R11))² > f²
//! ```
//!
//! where `ω_i` is the norm of row `i` of `R11⁻¹` and `γ_j` the norm of column
//! `j` of `R22`. (With `ω_i` defined as the reciprocal of that row norm, the
//! same quantity is usually written `γ_j / ω_i`.) The square root of the left-hand side is exactly the factor
//! by which `|det(R11)|` grows under that swap, so with `f > 1` every swap
//! strictly increases `det(R11)` and the loop terminates. At termination
//! every entry of `R11⁻¹·R12` is bounded by `f` and
//! `σ_min(R11) ≥ σ_k(A) / √(1 + f²·k·(n − k))`.
//!
//! After a swap the factorization is re-triangularized from the lower of the
//! two swapped columns onward; each swap therefore costs `O(m·n·k)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{column_pivoted_qr, numerical_rank, retriangularize, DenseMatrix};
use crate::selection::{Method, SelectionResult};

pub const DEFAULT_F: f64 = 1.1;
pub const DEFAULT_TOL_ZERO: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RrqrConfig {
    /// Size of the leading block (number of features to select).
    pub k: usize,
    /// Swap bound; must be strictly greater than 1.
    pub f: f64,
    /// Safety cap on swaps; `None` means `4·n·k`.
    pub max_swaps: Option<usize>,
    /// A diagonal entry of `R11` with `|r_ii| <= tol_zero · max|r_jj|` is
    /// treated as zero.
    pub tol_zero: f64,
}

impl RrqrConfig {
    pub fn new(k: usize, f: f64) -> Self {
        Self {
            k,
            f,
            max_swaps: None,
            tol_zero: DEFAULT_TOL_ZERO,
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if !(self.f > 1.0) || !self.f.is_finite() {
            return Err(Error::InvalidInput(format!(
                "swap bound f must be finite and > 1, got {}",
                self.f
            )));
        }
        let limit = rows.min(cols);
        if self.k == 0 || self.k > limit {
            return Err(Error::InvalidInput(format!(
                "k must satisfy 1 <= k <= min(rows, cols) = {limit}, got {}",
                self.k
            )));
        }
        if !(self.tol_zero >= 0.0) {
            return Err(Error::InvalidInput("tol_zero must be >= 0".into()));
        }
        Ok(())
    }

    pub fn max_swaps_for(&self, cols: usize) -> usize {
        self.max_swaps.unwrap_or(4 * cols * self.k)
    }
}

/// `A·Π = Q·R` with `R = [[R11, R12], [0, R22]]`, `R11` k×k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RrqrFactorization {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    /// `perm[p]` is the original column placed at position `p`.
    pub perm: Vec<usize>,
    pub k: usize,
    pub f: f64,
    pub swaps_performed: usize,
    /// Largest swap-criterion value at termination (`<= f²`).
    pub certificate: f64,
    /// `ln|det(R11)|` before the first swap and after every swap.
    pub log_det_history: Vec<f64>,
}

impl RrqrFactorization {
    pub fn r11(&self) -> DenseMatrix {
        self.r.block(0, self.k, 0, self.k)
    }

    pub fn r12(&self) -> DenseMatrix {
        self.r.block(0, self.k, self.k, self.r.cols())
    }

    /// Possibly zero-row when `k` equals the row count of `R`.
    pub fn r22(&self) -> DenseMatrix {
        self.r.block(self.k, self.r.rows(), self.k, self.r.cols())
    }

    pub fn q1(&self) -> DenseMatrix {
        self.q.block(0, self.q.rows(), 0, self.k)
    }

    pub fn selected(&self) -> &[usize] {
        &self.perm[..self.k]
    }

    pub fn log_det_r11(&self) -> f64 {
        log_abs_det_upper(&self.r, self.k)
    }
}

fn log_abs_det_upper(r: &DenseMatrix, k: usize) -> f64 {
    (0..k).map(|i| r[(i, i)].abs().ln()).sum()
}

fn check_nonsingular(r: &DenseMatrix, k: usize, tol_zero: f64) -> std::result::Result<(), (usize, f64)> {
    let scale = (0..r.rows().min(r.cols()))
        .map(|i| r[(i, i)].abs())
        .fold(0.0, f64::max);
    for i in 0..k {
        let d = r[(i, i)].abs();
        if d == 0.0 || d <= tol_zero * scale {
            return Err((i, r[(i, i)]));
        }
    }
    Ok(())
}

/// Row norms of `R11⁻¹`, one forward substitution `R11ᵀ·y = e_i` per row.
pub fn omega(r11: &DenseMatrix) -> Result<Vec<f64>> {
    omega_with_tol(r11, DEFAULT_TOL_ZERO)
}

fn omega_with_tol(r11: &DenseMatrix, tol_zero: f64) -> Result<Vec<f64>> {
    let k = r11.rows();
    if r11.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "omega needs a square block, got {}x{}",
            k,
            r11.cols()
        )));
    }
    check_nonsingular(r11, k, tol_zero).map_err(|(index, value)| Error::RankDeficient {
        index,
        value,
        partial: None,
    })?;
    let mut out = Vec::with_capacity(k);
    let mut y = vec![0.0; k];
    for i in 0..k {
        // Row i of R11⁻¹ is zero before column i.
        y.iter_mut().for_each(|v| *v = 0.0);
        y[i] = 1.0 / r11[(i, i)];
        for c in i + 1..k {
            let mut s = 0.0;
            for p in i..c {
                s += r11[(p, c)] * y[p];
            }
            y[c] = -s / r11[(c, c)];
        }
        out.push(crate::matrix::norm2(&y[i..]));
    }
    Ok(out)
}

/// Column norms.
pub fn gamma(r22: &DenseMatrix) -> Vec<f64> {
    r22.col_norms()
}

/// `R11⁻¹·R12` by back substitution, column by column.
fn solve_upper(r11: &DenseMatrix, rhs: &DenseMatrix) -> DenseMatrix {
    let k = r11.rows();
    let mut x = rhs.clone();
    for c in 0..x.cols() {
        let col = x.col_mut(c);
        for i in (0..k).rev() {
            let mut s = col[i];
            for p in i + 1..k {
                s -= r11[(i, p)] * col[p];
            }
            col[i] = s / r11[(i, i)];
        }
    }
    x
}

/// All criterion values as a k×(n−k) matrix.
fn criterion_matrix(r: &DenseMatrix, k: usize, tol_zero: f64) -> Result<DenseMatrix> {
    let n = r.cols();
    let r11 = r.block(0, k, 0, k);
    let om = omega_with_tol(&r11, tol_zero)?;
    let x = solve_upper(&r11, &r.block(0, k, k, n));
    let ga = gamma(&r.block(k, r.rows(), k, n));
    Ok(DenseMatrix::from_fn(k, n - k, |i, j| {
        let t = ga[j] * om[i];
        x[(i, j)] * x[(i, j)] + t * t
    }))
}

/// Criterion for swapping column `i` of `R11` with column `j` of `R22`
/// (0-based, `i < k`, `j < n − k`). Its square root is
/// `|det(R11')| / |det(R11)|` for the swapped factorization.
pub fn swap_criterion(fact: &RrqrFactorization, i: usize, j: usize) -> Result<f64> {
    let n = fact.r.cols();
    if i >= fact.k || j >= n - fact.k {
        return Err(Error::InvalidInput(format!(
            "swap indices ({i}, {j}) out of range for k = {}, n = {n}",
            fact.k
        )));
    }
    let m = criterion_matrix(&fact.r, fact.k, DEFAULT_TOL_ZERO)?;
    Ok(m[(i, j)])
}

/// Every criterion value of `fact`; used for exhaustive certificate checks.
pub fn all_swap_criteria(fact: &RrqrFactorization) -> Result<DenseMatrix> {
    criterion_matrix(&fact.r, fact.k, DEFAULT_TOL_ZERO)
}

/// Strong RRQR by greedy determinant-increasing swaps.
pub fn strong_rrqr(a: &DenseMatrix, cfg: &RrqrConfig) -> Result<RrqrFactorization> {
    let (m, n) = a.shape();
    cfg.validate(m, n)?;
    let (qr, perm) = column_pivoted_qr(a)?;
    let k = cfg.k;
    let bound = cfg.f * cfg.f;
    let max_swaps = cfg.max_swaps_for(n);

    let mut fact = RrqrFactorization {
        q: qr.q,
        r: qr.r,
        perm,
        k,
        f: cfg.f,
        swaps_performed: 0,
        certificate: 0.0,
        log_det_history: Vec::new(),
    };

    loop {
        if let Err((index, value)) = check_nonsingular(&fact.r, k, cfg.tol_zero) {
            return Err(Error::RankDeficient {
                index,
                value,
                partial: Some(Box::new(fact)),
            });
        }
        fact.log_det_history.push(fact.log_det_r11());
        if k == n {
            fact.certificate = 0.0;
            return Ok(fact);
        }

        let crit = criterion_matrix(&fact.r, k, cfg.tol_zero)?;
        // Largest value; ties go to the smallest i, then the smallest j.
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..k {
            for j in 0..n - k {
                let v = crit[(i, j)];
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (i, j, value) = best;
        if !value.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: fact.swaps_performed,
                what: "non-finite swap criterion".into(),
            });
        }
        if value <= bound {
            fact.certificate = value;
            return Ok(fact);
        }
        if fact.swaps_performed >= max_swaps {
            return Err(Error::NonTermination {
                max_swaps,
                f: cfg.f,
            });
        }

        fact.r.swap_cols(i, k + j);
        fact.perm.swap(i, k + j);
        retriangularize(&mut fact.q, &mut fact.r, i);
        fact.swaps_performed += 1;
    }
}

/// Selects `k` features as the leading columns of a strong RRQR permutation.
///
/// If `k` exceeds the numerical rank of `data` the selection is truncated to
/// the rank and flagged; columns beyond the rank carry no independent
/// information.
pub fn select_features_rrqr(data: &DenseMatrix, k: usize, f: f64) -> Result<SelectionResult> {
    let (m, n) = data.shape();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k must satisfy 1 <= k <= {n} features, got {k}"
        )));
    }
    data.check_finite()?;
    let rank = numerical_rank(data);
    if rank == 0 {
        return Err(Error::InvalidInput("data matrix is numerically zero".into()));
    }
    let k_eff = k.min(rank).min(m);
    let mut warnings = Vec::new();
    if k_eff < k {
        warnings.push(format!(
            "requested {k} features but numerical rank is {rank}; selection truncated to {k_eff}"
        ));
    }

    let cfg = RrqrConfig::new(k_eff, f);
    let fact = strong_rrqr(data, &cfg)?;
    let selected = fact.selected().to_vec();
    let scores = (0..k_eff).map(|i| fact.r[(i, i)].abs()).collect();

    let mut params = BTreeMap::new();
    params.insert("k".into(), k as f64);
    params.insert("k_effective".into(), k_eff as f64);
    params.insert("f".into(), f);
    params.insert("rank".into(), rank as f64);
    params.insert("swaps".into(), fact.swaps_performed as f64);
    params.insert("certificate".into(), fact.certificate);

    Ok(SelectionResult {
        selected,
        scores,
        method: Method::Rrqr,
        params,
        truncated: k_eff < k,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{jacobi_svd, DenseMatrix};
    use crate::test_util::random_matrix;

    fn fact_from_r(r: DenseMatrix, k: usize) -> RrqrFactorization {
        let n = r.cols();
        RrqrFactorization {
            q: DenseMatrix::identity(r.rows()),
            r,
            perm: (0..n).collect(),
            k,
            f: DEFAULT_F,
            swaps_performed: 0,
            certificate: 0.0,
            log_det_history: vec![],
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&DenseMatrix::from_diag(&[2.0, 4.0])).unwrap(), vec![0.5, 0.25]);
        assert_eq!(omega(&DenseMatrix::identity(4)).unwrap(), vec![1.0; 4]);
        let r = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let w = omega(&r).unwrap();
        assert!((w[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_rejects_singular() {
        let r = DenseMatrix::from_diag(&[1.0, 0.0, 2.0]);
        assert!(matches!(omega(&r), Err(Error::RankDeficient { index: 1, .. })));
    }

    #[test]
    fn gamma_examples() {
        let m = DenseMatrix::from_rows(&[[3.0, 0.0], [4.0, 0.0], [0.0, 5.0]]).unwrap();
        assert_eq!(gamma(&m), vec![5.0, 5.0]);
        assert_eq!(gamma(&DenseMatrix::zeros(3, 2)), vec![0.0, 0.0]);
        let a = random_matrix(6, 3, 9);
        let g = gamma(&a);
        for j in 0..3 {
            let mut s = 0.0;
            for i in 0..6 {
                s += a[(i, j)] * a[(i, j)];
            }
            assert!((g[j] - s.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn criterion_zero_for_exact_rank_k() {
        let r = DenseMatrix::from_rows(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let f = fact_from_r(r, 2);
        assert_eq!(swap_criterion(&f, 0, 0).unwrap(), 0.0);
        assert_eq!(swap_criterion(&f, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn criterion_scalar_case() {
        let (x, y) = (0.7, -1.3);
        let r = DenseMatrix::from_rows(&[[1.0, x], [0.0, y]]).unwrap();
        let f = fact_from_r(r, 1);
        let c = swap_criterion(&f, 0, 0).unwrap();
        assert!((c - (x * x + y * y)).abs() < 1e-15);
        assert!(swap_criterion(&f, 1, 0).is_err());
    }

    #[test]
    fn already_optimal_diagonal() {
        let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let fact = strong_rrqr(&a, &RrqrConfig::new(2, 1.1)).unwrap();
        assert_eq!(&fact.perm[..2], &[0, 1]);
        assert_eq!(fact.swaps_performed, 0);
    }

    #[test]
    fn config_validation() {
        let a = random_matrix(4, 5, 1);
        assert!(strong_rrqr(&a, &RrqrConfig::new(2, 1.0)).is_err());
        assert!(strong_rrqr(&a, &RrqrConfig::new(0, 1.5)).is_err());
        assert!(strong_rrqr(&a, &RrqrConfig::new(5, 1.5)).is_err());
        assert!(strong_rrqr(&a, &RrqrConfig::new(4, 1.5)).is_ok());
    }

    #[test]
    fn reconstruction_and_certificate() {
        let a = random_matrix(12, 20, 3);
        for &k in &[1, 3, 7, 12] {
            let fact = strong_rrqr(&a, &RrqrConfig::new(k, 1.05)).unwrap();
            let ap = a.select_cols(&fact.perm);
            let res = ap.sub(&fact.q.matmul(&fact.r)).frobenius_norm();
            assert!(res <= 1e-12 * a.frobenius_norm());
            let crit = all_swap_criteria(&fact).unwrap();
            assert!(crit.max_abs() <= 1.05 * 1.05 + 1e-8);
            assert!(fact.r11().diag().iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn determinant_grows_by_more_than_f_per_swap() {
        let a = random_matrix(15, 15, 21);
        let f = 1.01;
        let fact = strong_rrqr(&a, &RrqrConfig::new(6, f)).unwrap();
        for w in fact.log_det_history.windows(2) {
            assert!(w[1] - w[0] > f.ln() - 1e-12);
        }
    }

    #[test]
    fn duplicated_column_pair_keeps_one_copy() {
        let mut rows = vec![];
        for i in 0..6 {
            let c = if i < 3 { (i + 1) as f64 } else { 0.0 };
            let d = if i >= 3 { (i as f64) - 2.0 } else { 0.0 };
            rows.push(vec![c, c, d]);
        }
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let fact = strong_rrqr(&a, &RrqrConfig::new(2, 1.1)).unwrap();
        let sel = fact.selected();
        assert!(sel.contains(&2));
        assert!(sel.contains(&0) ^ sel.contains(&1));
        assert!(fact.r22().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn selection_diag() {
        let a = DenseMatrix::from_diag(&[5.0, 3.0, 1.0]);
        let s = select_features_rrqr(&a, 2, 1.1).unwrap();
        assert_eq!(s.selected, vec![0, 1]);
        assert_eq!(s.scores, vec![5.0, 3.0]);
        assert!(!s.truncated);
    }

    #[test]
    fn selection_truncates_past_rank() {
        let mut a = random_matrix(8, 6, 5);
        for j in 3..6 {
            let c = a.col(j - 3).to_vec();
            a.col_mut(j).copy_from_slice(&c);
        }
        let s = select_features_rrqr(&a, 5, 1.1).unwrap();
        assert!(s.truncated);
        assert_eq!(s.len(), 3);
        assert_eq!(s.warnings.len(), 1);
        let mut groups: Vec<usize> = s.selected.iter().map(|&j| j % 3).collect();
        groups.sort();
        assert_eq!(groups, vec![0, 1, 2]);
    }

    #[test]
    fn full_rank_k_leaves_negligible_r22() {
        let a = random_matrix(10, 4, 17);
        let fact = strong_rrqr(&a, &RrqrConfig::new(4, 1.1)).unwrap();
        assert!(fact.r22().frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn sigma_min_bound_random() {
        let a = random_matrix(20, 30, 77);
        let sv = jacobi_svd(&a).unwrap().singular_values;
        for &k in &[2, 5, 10, 19] {
            let f = 1.1;
            let fact = strong_rrqr(&a, &RrqrConfig::new(k, f)).unwrap();
            let smin = jacobi_svd(&fact.r11()).unwrap().sigma_min();
            let bound = sv[k - 1] / (1.0 + f * f * (k * (30 - k)) as f64).sqrt();
            assert!(smin >= bound, "k={k}: {smin} < {bound}");
        }
    }
}
