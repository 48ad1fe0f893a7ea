//! Householder QR, with and without column pivoting.
//!
//! Both routines return the economy factorization `A·Π = Q·R` with
//! `Q` m×r (orthonormal columns), `R` r×n upper triangular, `r = min(m, n)`,
//! and the diagonal of `R` forced nonnegative by flipping the sign of
//! matching `Q` columns / `R` rows.

use serde::{Deserialize, Serialize};

use super::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Relative margin a later column's residual norm must exceed the current
/// best by before it wins the pivot. Columns whose norms agree to rounding
/// keep their original order, so exactly tied inputs (orthogonal columns of
/// equal norm, the Kahan family) factor deterministically.
pub const PIVOT_TIE_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QrResult {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

impl QrResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q.matmul(&self.r)
    }
}

/// Economy Householder QR without pivoting.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrResult> {
    validate(a)?;
    Ok(factor(a, false).0)
}

/// Householder QR with greedy max-residual-norm column pivoting.
///
/// Returns the factorization of `A[:, perm]` and `perm` itself.
pub fn column_pivoted_qr(a: &DenseMatrix) -> Result<(QrResult, Vec<usize>)> {
    validate(a)?;
    Ok(factor(a, true))
}

fn validate(a: &DenseMatrix) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidInput(format!(
            "QR needs at least one row and column, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.check_finite()
}

/// Overwrites `x` with the Householder vector `v` (`v[0] = 1`) and returns
/// `(tau, beta)` so that `(I - tau·v·vᵀ)·x_original = beta·e1`.
fn make_reflector(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail = norm2(&x[1..]);
    if tail == 0.0 {
        x[0] = 1.0;
        x[1..].iter_mut().for_each(|v| *v = 0.0);
        return (0.0, alpha);
    }
    let norm = alpha.hypot(tail);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    x[0] = 1.0;
    ((beta - alpha) / beta, beta)
}

/// `M[row0.., c] -= tau·v·(vᵀ·M[row0.., c])` for every `c` in `cols`.
fn apply_left(v: &[f64], tau: f64, m: &mut DenseMatrix, row0: usize, cols: std::ops::Range<usize>) {
    if tau == 0.0 {
        return;
    }
    for c in cols {
        let col = &mut m.col_mut(c)[row0..row0 + v.len()];
        let s: f64 = col.iter().zip(v).map(|(a, b)| a * b).sum();
        let s = tau * s;
        for (a, b) in col.iter_mut().zip(v) {
            *a -= s * b;
        }
    }
}

/// `Q[:, col0..col0+len] ← Q[:, col0..]·(I - tau·v·vᵀ)`.
fn apply_right(v: &[f64], tau: f64, q: &mut DenseMatrix, col0: usize) {
    if tau == 0.0 {
        return;
    }
    let m = q.rows();
    let mut w = vec![0.0; m];
    for (t, &vt) in v.iter().enumerate() {
        for (wi, &qi) in w.iter_mut().zip(q.col(col0 + t)) {
            *wi += qi * vt;
        }
    }
    for (t, &vt) in v.iter().enumerate() {
        let s = tau * vt;
        for (qi, &wi) in q.col_mut(col0 + t).iter_mut().zip(&w) {
            *qi -= s * wi;
        }
    }
}

fn pick_pivot(work: &DenseMatrix, j: usize) -> usize {
    let mut best = j;
    let mut best_norm = norm2(&work.col(j)[j..]);
    for c in j + 1..work.cols() {
        let nc = norm2(&work.col(c)[j..]);
        if nc > best_norm * (1.0 + PIVOT_TIE_RTOL) {
            best = c;
            best_norm = nc;
        }
    }
    best
}

fn factor(a: &DenseMatrix, pivot: bool) -> (QrResult, Vec<usize>) {
    let (m, n) = a.shape();
    let r = m.min(n);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors = Vec::with_capacity(r);

    for j in 0..r {
        if pivot {
            let p = pick_pivot(&work, j);
            if p != j {
                work.swap_cols(j, p);
                perm.swap(j, p);
            }
        }
        let mut v = work.col(j)[j..].to_vec();
        let (tau, beta) = make_reflector(&mut v);
        apply_left(&v, tau, &mut work, j, j + 1..n);
        let col = work.col_mut(j);
        col[j] = beta;
        col[j + 1..].iter_mut().for_each(|x| *x = 0.0);
        reflectors.push((v, tau));
    }

    let mut rmat = work.block(0, r, 0, n);
    let mut q = DenseMatrix::from_fn(m, r, |i, j| if i == j { 1.0 } else { 0.0 });
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        apply_left(v, *tau, &mut q, j, j..r);
    }
    fix_signs(&mut q, &mut rmat, 0);
    (QrResult { q, r: rmat }, perm)
}

/// Negates row `i` of `R` and column `i` of `Q` wherever `R[i, i] < 0`, for
/// `i >= from`. `Q·R` is unchanged.
fn fix_signs(q: &mut DenseMatrix, r: &mut DenseMatrix, from: usize) {
    for i in from..r.rows().min(r.cols()) {
        if r[(i, i)] < 0.0 {
            for c in i..r.cols() {
                r[(i, c)] = -r[(i, c)];
            }
            q.col_mut(i).iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Restores upper-triangular form of `R` from column `start` onward after a
/// column permutation, accumulating the reflectors into `Q` so that `Q·R` is
/// preserved. Columns before `start` must already be triangular.
pub(crate) fn retriangularize(q: &mut DenseMatrix, r: &mut DenseMatrix, start: usize) {
    let (rr, n) = r.shape();
    for j in start..rr.min(n) {
        let mut v = r.col(j)[j..].to_vec();
        let (tau, beta) = make_reflector(&mut v);
        apply_left(&v, tau, r, j, j + 1..n);
        apply_right(&v, tau, q, j);
        let col = r.col_mut(j);
        col[j] = beta;
        col[j + 1..].iter_mut().for_each(|x| *x = 0.0);
    }
    fix_signs(q, r, start);
}
