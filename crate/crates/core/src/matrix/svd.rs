//! One-sided (Hestenes) Jacobi SVD.
//!
//! Used as a verification oracle, for numerical-rank estimation and behind
//! the pseudoinverse. Accurate, quadratic-convergent, and slow: sized for
//! desk-scale matrices only.

use serde::{Deserialize, Serialize};

use super::dense::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Largest `min(m, n)` accepted by [`jacobi_svd`].
pub const DEFAULT_ORACLE_CAP: usize = 512;

/// Singular values below `PINV_RTOL · σ_max` are treated as zero by
/// [`pseudoinverse`].
pub const PINV_RTOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// m×p left singular vectors, `p = min(m, n)`, when requested.
    pub u: Option<DenseMatrix>,
    /// n×p right singular vectors, when requested.
    pub v: Option<DenseMatrix>,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Singular values of `a` (no vectors), refusing inputs over the default cap.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<SvdResult> {
    jacobi_svd_with(a, DEFAULT_ORACLE_CAP, false)
}

pub fn jacobi_svd_with(a: &DenseMatrix, cap: usize, vectors: bool) -> Result<SvdResult> {
    let dim = a.rows().min(a.cols());
    if dim > cap {
        return Err(Error::OverCap { dim, cap });
    }
    a.check_finite()?;
    Ok(svd_uncapped(a, vectors))
}

pub(crate) fn svd_uncapped(a: &DenseMatrix, vectors: bool) -> SvdResult {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose(), vectors);
        return SvdResult {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        };
    }
    svd_tall(a, vectors)
}

/// Requires `rows >= cols`.
fn svd_tall(a: &DenseMatrix, vectors: bool) -> SvdResult {
    let n = a.cols();
    let mut w = a.clone();
    let mut v = vectors.then(|| DenseMatrix::identity(n));

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
    let singular_values = order.iter().map(|&j| sigma[j]).collect();

    let (u, v) = if let Some(v) = v {
        let u = DenseMatrix::from_fn(a.rows(), n, |i, jj| {
            let j = order[jj];
            if sigma[j] > 0.0 {
                w[(i, j)] / sigma[j]
            } else {
                0.0
            }
        });
        (Some(u), Some(v.select_cols(&order)))
    } else {
        (None, None)
    };
    SvdResult {
        singular_values,
        u,
        v,
    }
}

fn rotate(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = c * xp - s * xq;
        m[(i, q)] = s * xp + c * xq;
    }
}

/// Count of singular values above `max(m, n)·ε·σ_1`.
pub fn numerical_rank(a: &DenseMatrix) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = svd_uncapped(a, false).singular_values;
    rank_from_singular_values(&sv, a.rows().max(a.cols()))
}

pub fn rank_from_singular_values(sv: &[f64], max_dim: usize) -> usize {
    let s1 = sv.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return 0;
    }
    let cut = max_dim as f64 * f64::EPSILON * s1;
    sv.iter().filter(|&&s| s > cut).count()
}

/// Moore–Penrose pseudoinverse via the Jacobi SVD, `A† = V·Σ⁺·Uᵀ`.
pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.check_finite()?;
    let (m, n) = a.shape();
    if a.is_empty() {
        return Ok(DenseMatrix::zeros(n, m));
    }
    let svd = svd_uncapped(a, true);
    let u = svd.u.as_ref().expect("vectors requested");
    let v = svd.v.as_ref().expect("vectors requested");
    let cut = PINV_RTOL * svd.sigma_max();
    let mut out = DenseMatrix::zeros(n, m);
    for (t, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for j in 0..m {
            let uj = u[(j, t)] * inv;
            if uj == 0.0 {
                continue;
            }
            for (o, &vi) in out.col_mut(j).iter_mut().zip(v.col(t)) {
                *o += vi * uj;
            }
        }
    }
    Ok(out)
}

/// The Kahan upper-triangular family `diag(1, s, …, s^{n-1})·K`, where `K`
/// has ones on the diagonal and `-c` above it, `s = √(1 - c²)`.
pub fn kahan_matrix(n: usize, c: f64) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("Kahan matrix needs n >= 2, got {n}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidInput(format!("Kahan parameter c must lie in (0, 1), got {c}")));
    }
    let s = (1.0 - c * c).sqrt();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let scale = s.powi(i as i32);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => scale,
            std::cmp::Ordering::Less => -c * scale,
            std::cmp::Ordering::Greater => 0.0,
        }
    }))
}
