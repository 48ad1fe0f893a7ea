//! NMF-QR unsupervised feature selection.
//!
//! The data matrix `A` (m samples × n features) is approximated as `A·W·H`,
//! where `W` (n×k) is a nonnegative feature-weight matrix and `H` (k×n)
//! plays the role of the `[R11 R12]` block of a QR factorization of `A`.
//! The minimized objective is
//!
//! ```text
//! ½‖A − AWH‖²_F + α/2·Tr(WᵀAᵀSAW) + γ/2·Tr(WᵀΦW) + β/4·‖WᵀW − I‖²_F
//! ```
//!
//! with `S` the heat-kernel k-NN graph Laplacian over samples and `Φ` the
//! reweighting matrix of the ℓ2,1/2 row-sparsity penalty. Each iteration
//! normalizes `W` (columns by default, see [`WNormalization`]), refreshes `Φ`,
//! applies one multiplicative update to `W`, then sets `H = (AW)†·A`.
//! Features are ranked by the row norms of the final `W`.
//!
//! `A` is first scaled to unit RMS column norm, so the weights keep their
//! meaning across data units and rescaling `A` does not change the ranking.
//!
//! `AᵀA` and `AᵀSA` are never materialized; products are evaluated
//! right-to-left so that one iteration costs `O(m·n·k + m²·k)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{householder_qr, numerical_rank, pseudoinverse, DenseMatrix};
use crate::selection::{Method, SelectionResult};

/// Floor applied to the multiplicative-update denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// How `W` is normalized at the start of each iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WNormalization {
    /// `W·D⁻¹` with `D = diag(WᵀW)^{1/2}`: every nonzero column gets unit
    /// norm. Row norms keep their relative sizes across iterations, so row
    /// sparsity accumulates and `W` settles on a few dominant rows.
    #[default]
    Columns,
    /// `D⁻¹W` with `D = diag(WWᵀ)^{1/2}`: every nonzero row gets unit norm.
    /// The row norms that rank features are then reset every iteration and
    /// only the last update separates them; the final ranking is sensitive
    /// to rounding-level perturbations of `A`.
    Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfQrConfig {
    /// Weight of the graph-Laplacian structure term.
    pub alpha: f64,
    /// Orthogonality penalty on `WᵀW − I`.
    pub beta: f64,
    /// Weight of the ℓ2,1/2 sparsity term.
    pub gamma_sparse: f64,
    /// Stabilizer inside `Φ`.
    pub epsilon: f64,
    /// Neighbors per sample in the affinity graph.
    pub knn_k: usize,
    /// Heat-kernel bandwidth; `None` means the mean squared pairwise distance.
    pub kernel_bandwidth: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
    /// Subspace rank; `None` means the numerical rank of `A`.
    pub rank_k: Option<usize>,
    #[serde(default)]
    pub normalization: WNormalization,
}

impl Default for NmfQrConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 100.0,
            gamma_sparse: 1.0,
            epsilon: 1e-8,
            knn_k: 5,
            kernel_bandwidth: None,
            max_iters: 200,
            seed: 0,
            rank_k: None,
            normalization: WNormalization::Columns,
        }
    }
}

impl NmfQrConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma_sparse", self.gamma_sparse),
        ];
        for (name, v) in weights {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.knn_k == 0 {
            return Err(Error::InvalidInput("knn_k must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be >= 1".into()));
        }
        if let Some(b) = self.kernel_bandwidth {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidInput(format!("kernel_bandwidth must be > 0, got {b}")));
            }
        }
        if self.rank_k == Some(0) {
            return Err(Error::InvalidInput("rank_k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfQrState {
    /// n×k, entrywise nonnegative.
    pub w: DenseMatrix,
    /// k×n.
    pub h: DenseMatrix,
    /// Diagonal of `Φ`.
    pub phi: Vec<f64>,
    /// m×m graph Laplacian over samples.
    pub laplacian: DenseMatrix,
    /// Objective (Lagrange-multiplier term excluded) after each iteration.
    pub objective_trace: Vec<f64>,
}

/// Per-iteration diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub iteration: usize,
    /// Largest deviation from unit norm over the nonzero rows (or columns)
    /// right after normalization.
    pub normalize_deviation: f64,
    /// Smallest entry of `W` after the multiplicative update.
    pub min_w: f64,
    /// `½‖A − AWH‖²` with the new `W` and the previous `H`.
    pub recon_before_h: f64,
    /// Same, after `H = (AW)†A`.
    pub recon_after_h: f64,
    /// `max |W ⊙ ∂L/∂W|`; zero at a KKT point of the multiplicative scheme.
    pub kkt_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfQrOutput {
    pub state: NmfQrState,
    pub rank_k: usize,
    pub bandwidth: f64,
    /// Factor `A` was divided by; reconstruction values are in scaled units.
    pub data_scale: f64,
    pub diagnostics: Vec<IterationDiagnostics>,
}

fn squared_distances(data: &DenseMatrix) -> DenseMatrix {
    let m = data.rows();
    let mut d = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let mut s = 0.0;
            for c in 0..data.cols() {
                let t = data[(i, c)] - data[(j, c)];
                s += t * t;
            }
            d[(i, j)] = s;
            d[(j, i)] = s;
        }
    }
    d
}

/// Mean squared distance over distinct sample pairs (1 if all coincide).
pub fn default_bandwidth(data: &DenseMatrix) -> f64 {
    let m = data.rows();
    if m < 2 {
        return 1.0;
    }
    let d = squared_distances(data);
    let mut s = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            s += d[(i, j)];
        }
    }
    let mean = s / (m * (m - 1) / 2) as f64;
    if mean > 0.0 {
        mean
    } else {
        1.0
    }
}

/// Symmetric heat-kernel affinity over samples restricted to k-NN pairs.
///
/// `Γ_ij = exp(−‖a_i − a_j‖²/σ)` when either sample is among the other's
/// `knn_k` nearest neighbours (self excluded, distance ties to the lower
/// index), else 0.
pub fn affinity_matrix(data: &DenseMatrix, knn_k: usize, bandwidth: f64) -> Result<DenseMatrix> {
    let m = data.rows();
    if m < 2 {
        return Err(Error::InvalidInput(format!("affinity needs >= 2 samples, got {m}")));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidInput(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    if knn_k == 0 {
        return Err(Error::InvalidInput("knn_k must be >= 1".into()));
    }
    let d = squared_distances(data);
    let kk = knn_k.min(m - 1);
    let mut linked = vec![vec![false; m]; m];
    for i in 0..m {
        let mut others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d[(i, a)].total_cmp(&d[(i, b)]).then(a.cmp(&b)));
        for &j in &others[..kk] {
            linked[i][j] = true;
            linked[j][i] = true;
        }
    }
    Ok(DenseMatrix::from_fn(m, m, |i, j| {
        if linked[i][j] {
            (-d[(i, j)] / bandwidth).exp()
        } else {
            0.0
        }
    }))
}

/// `S = D − Γ` with `D_ii = Σ_j Γ_ij`.
pub fn graph_laplacian(gamma_aff: &DenseMatrix) -> Result<DenseMatrix> {
    let m = gamma_aff.rows();
    if gamma_aff.cols() != m {
        return Err(Error::DimensionMismatch(format!(
            "affinity must be square, got {}x{}",
            m,
            gamma_aff.cols()
        )));
    }
    gamma_aff.check_finite()?;
    for i in 0..m {
        for j in 0..m {
            let g = gamma_aff[(i, j)];
            if g < 0.0 {
                return Err(Error::InvalidInput(format!("affinity entry ({i}, {j}) is negative")));
            }
            if (g - gamma_aff[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("affinity is not symmetric at ({i}, {j})")));
            }
        }
    }
    let degree: Vec<f64> = (0..m).map(|i| (0..m).map(|j| gamma_aff[(i, j)]).sum()).collect();
    Ok(DenseMatrix::from_fn(m, m, |i, j| {
        if i == j {
            degree[i] - gamma_aff[(i, i)]
        } else {
            -gamma_aff[(i, j)]
        }
    }))
}

/// Diagonal of `Φ`: `1 / (4·(‖w^i‖₂ + ε)^{3/2})` per row of `W`.
pub fn phi_matrix(w: &DenseMatrix, epsilon: f64) -> Vec<f64> {
    w.row_norms()
        .into_iter()
        .map(|r| 1.0 / (4.0 * (r + epsilon).powf(1.5)))
        .collect()
}

/// `D⁻¹·W` with `D = diag(WWᵀ)^{1/2}`; zero rows stay zero.
pub fn normalize_rows(w: &DenseMatrix) -> DenseMatrix {
    let norms = w.row_norms();
    DenseMatrix::from_fn(w.rows(), w.cols(), |i, j| {
        if norms[i] > 0.0 {
            w[(i, j)] / norms[i]
        } else {
            0.0
        }
    })
}

/// `W·D⁻¹` with `D = diag(WᵀW)^{1/2}`; zero columns stay zero.
pub fn normalize_columns(w: &DenseMatrix) -> DenseMatrix {
    let norms = w.col_norms();
    DenseMatrix::from_fn(w.rows(), w.cols(), |i, j| {
        if norms[j] > 0.0 {
            w[(i, j)] / norms[j]
        } else {
            0.0
        }
    })
}

/// Products needed by one update, split by sign.
struct UpdateTerms {
    /// `AᵀA·Hᵀ`
    reconstruction_pull: DenseMatrix,
    /// `AᵀA·W·H·Hᵀ`
    reconstruction_push: DenseMatrix,
    /// `AᵀSA·W`
    structure: DenseMatrix,
}

fn update_terms(w: &DenseMatrix, h: &DenseMatrix, data: &DenseMatrix, lap: &DenseMatrix) -> UpdateTerms {
    let ht = h.transpose();
    let reconstruction_pull = data.tr_matmul(&data.matmul(&ht));
    let aw = data.matmul(w);
    let hht = h.matmul(&ht);
    let reconstruction_push = data.tr_matmul(&aw.matmul(&hht));
    let structure = data.tr_matmul(&lap.matmul(&aw));
    UpdateTerms {
        reconstruction_pull,
        reconstruction_push,
        structure,
    }
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

/// One multiplicative update of `W`.
///
/// The update ratio is `(AᵀAHᵀ + βW) / (AᵀAWHHᵀ + α·AᵀSAW + γ·ΦW + β·WWᵀW)`,
/// entrywise. `A` and `H` may have negative entries, so each signed term
/// `T = T⁺ − T⁻` contributes `T⁺` to its own side and `T⁻` to the other;
/// when every term is nonnegative this is the plain ratio. The denominator is
/// floored at [`DENOMINATOR_FLOOR`].
pub fn update_w(state: &NmfQrState, data: &DenseMatrix, cfg: &NmfQrConfig) -> Result<DenseMatrix> {
    let (n, k) = state.w.shape();
    if data.cols() != n || state.h.shape() != (k, n) || state.phi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "W {}x{}, H {}x{}, phi {} inconsistent with data {}x{}",
            n,
            k,
            state.h.rows(),
            state.h.cols(),
            state.phi.len(),
            data.rows(),
            data.cols()
        )));
    }
    if state.laplacian.shape() != (data.rows(), data.rows()) {
        return Err(Error::DimensionMismatch("laplacian must be samples x samples".into()));
    }
    update_w_inner(&state.w, &state.h, &state.phi, &state.laplacian, data, cfg, 0)
}

fn update_w_inner(
    w: &DenseMatrix,
    h: &DenseMatrix,
    phi: &[f64],
    lap: &DenseMatrix,
    data: &DenseMatrix,
    cfg: &NmfQrConfig,
    iteration: usize,
) -> Result<DenseMatrix> {
    let t = update_terms(w, h, data, lap);
    let wtw = w.tr_matmul(w);
    let orth = w.matmul(&wtw);
    let out = DenseMatrix::from_fn(w.rows(), w.cols(), |i, j| {
        let pull = t.reconstruction_pull[(i, j)];
        let push = t.reconstruction_push[(i, j)];
        let st = t.structure[(i, j)];
        let num = pos(pull) + cfg.beta * w[(i, j)] + neg(push) + cfg.alpha * neg(st);
        let den = neg(pull)
            + pos(push)
            + cfg.alpha * pos(st)
            + cfg.gamma_sparse * phi[i] * w[(i, j)]
            + cfg.beta * orth[(i, j)];
        w[(i, j)] * num / den.max(DENOMINATOR_FLOOR)
    });
    if let Err(Error::NonFinite { row, col }) = out.check_finite() {
        return Err(Error::NumericalFailure {
            iteration,
            what: format!("non-finite W entry at ({row}, {col})"),
        });
    }
    Ok(out)
}

/// `½‖A − AWH‖²_F`.
pub fn reconstruction_term(data: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> f64 {
    let r = data.sub(&data.matmul(w).matmul(h)).frobenius_norm();
    0.5 * r * r
}

/// The monitored objective with the Lagrange-multiplier term dropped.
pub fn objective(
    data: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
    phi: &[f64],
    lap: &DenseMatrix,
    cfg: &NmfQrConfig,
) -> f64 {
    let aw = data.matmul(w);
    let structure: f64 = {
        let saw = lap.matmul(&aw);
        (0..aw.cols())
            .map(|j| crate::matrix::dot(aw.col(j), saw.col(j)))
            .sum()
    };
    let sparse: f64 = w
        .row_norms()
        .iter()
        .zip(phi)
        .map(|(r, p)| p * r * r)
        .sum();
    let gram = w.tr_matmul(w).sub(&DenseMatrix::identity(w.cols())).frobenius_norm();
    reconstruction_term(data, w, h)
        + 0.5 * cfg.alpha * structure
        + 0.5 * cfg.gamma_sparse * sparse
        + 0.25 * cfg.beta * gram * gram
}

fn kkt_residual(
    data: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
    phi: &[f64],
    lap: &DenseMatrix,
    cfg: &NmfQrConfig,
) -> f64 {
    let t = update_terms(w, h, data, lap);
    let orth = w.matmul(&w.tr_matmul(w));
    let mut worst: f64 = 0.0;
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let g = -t.reconstruction_pull[(i, j)]
                + t.reconstruction_push[(i, j)]
                + cfg.alpha * t.structure[(i, j)]
                + cfg.gamma_sparse * phi[i] * w[(i, j)]
                + cfg.beta * (orth[(i, j)] - w[(i, j)]);
            worst = worst.max((w[(i, j)] * g).abs());
        }
    }
    worst
}

/// Runs the full NMF-QR iteration and returns the final state with
/// per-iteration diagnostics.
pub fn nmfqr_run(data: &DenseMatrix, cfg: &NmfQrConfig) -> Result<NmfQrOutput> {
    cfg.validate()?;
    data.check_finite()?;
    let (m, n) = data.shape();
    if m < 2 || n < 1 {
        return Err(Error::InvalidInput(format!(
            "NMF-QR needs >= 2 samples and >= 1 feature, got {m}x{n}"
        )));
    }
    let rank_k = match cfg.rank_k {
        Some(k) => k,
        None => numerical_rank(data),
    };
    if rank_k == 0 || rank_k > m.min(n) {
        return Err(Error::InvalidInput(format!(
            "rank_k must satisfy 1 <= rank_k <= min(samples, features) = {}, got {rank_k}",
            m.min(n)
        )));
    }

    // The graph is built from A as given, so a user bandwidth is in data units.
    let bandwidth = cfg.kernel_bandwidth.unwrap_or_else(|| default_bandwidth(data));
    let laplacian = graph_laplacian(&affinity_matrix(data, cfg.knn_k, bandwidth)?)?;

    // Work on A scaled to unit RMS column norm so the weights α, β, γ keep
    // their meaning across data units and the ranking is scale covariant.
    let data_scale = data.frobenius_norm() / (n as f64).sqrt();
    if !(data_scale > 0.0) {
        return Err(Error::InvalidInput("data matrix is identically zero".into()));
    }
    let scaled = data.scale(1.0 / data_scale);
    let data = &scaled;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = normalize_rows(&DenseMatrix::from_fn(n, rank_k, |_, _| rng.gen::<f64>()));

    let qr = householder_qr(data)?;
    let mut h = qr.r.block(0, rank_k, 0, n);

    let mut phi = vec![0.0; n];
    let mut objective_trace = Vec::with_capacity(cfg.max_iters);
    let mut diagnostics = Vec::with_capacity(cfg.max_iters);

    for iteration in 0..cfg.max_iters {
        let norms = match cfg.normalization {
            WNormalization::Rows => {
                w = normalize_rows(&w);
                w.row_norms()
            }
            WNormalization::Columns => {
                w = normalize_columns(&w);
                w.col_norms()
            }
        };
        let normalize_deviation = norms
            .iter()
            .filter(|&&r| r > 0.0)
            .fold(0.0f64, |acc, &r| acc.max((r - 1.0).abs()));

        phi = phi_matrix(&w, cfg.epsilon);
        w = update_w_inner(&w, &h, &phi, &laplacian, data, cfg, iteration)?;
        let min_w = w.iter().fold(f64::INFINITY, |a, &b| a.min(b));

        let recon_before_h = reconstruction_term(data, &w, &h);
        let aw = data.matmul(&w);
        let pinv = pseudoinverse(&aw)?;
        if aw.max_abs() == 0.0 || pinv.max_abs() == 0.0 {
            return Err(Error::DegenerateState { iteration });
        }
        h = pinv.matmul(data);
        if let Err(Error::NonFinite { .. }) = h.check_finite() {
            return Err(Error::NumericalFailure {
                iteration,
                what: "non-finite H after pseudoinverse update".into(),
            });
        }
        let recon_after_h = reconstruction_term(data, &w, &h);

        objective_trace.push(objective(data, &w, &h, &phi, &laplacian, cfg));
        diagnostics.push(IterationDiagnostics {
            iteration,
            normalize_deviation,
            min_w,
            recon_before_h,
            recon_after_h,
            kkt_residual: kkt_residual(data, &w, &h, &phi, &laplacian, cfg),
        });
    }

    Ok(NmfQrOutput {
        state: NmfQrState {
            w,
            h,
            phi,
            laplacian,
            objective_trace,
        },
        rank_k,
        bandwidth,
        data_scale,
        diagnostics,
    })
}

/// Top features by descending row norm of the final `W` (ties to the lower
/// index).
pub fn nmfqr_select(data: &DenseMatrix, cfg: &NmfQrConfig, top_k: usize) -> Result<SelectionResult> {
    let n = data.cols();
    if top_k == 0 || top_k > n {
        return Err(Error::InvalidInput(format!(
            "top_k must satisfy 1 <= top_k <= {n}, got {top_k}"
        )));
    }
    let out = nmfqr_run(data, cfg)?;
    Ok(rank_features(&out, cfg, top_k))
}

/// Ranks the features of a finished run by descending row norm of `W`.
pub fn rank_features(out: &NmfQrOutput, cfg: &NmfQrConfig, top_k: usize) -> SelectionResult {
    let norms = out.state.w.row_norms();
    let n = norms.len();
    let top_k = top_k.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order.truncate(top_k);

    let mut params = BTreeMap::new();
    params.insert("alpha".into(), cfg.alpha);
    params.insert("beta".into(), cfg.beta);
    params.insert("gamma_sparse".into(), cfg.gamma_sparse);
    params.insert("epsilon".into(), cfg.epsilon);
    params.insert("knn_k".into(), cfg.knn_k as f64);
    params.insert("kernel_bandwidth".into(), out.bandwidth);
    params.insert("max_iters".into(), cfg.max_iters as f64);
    params.insert("seed".into(), cfg.seed as f64);
    params.insert(
        "normalize_columns".into(),
        f64::from(u8::from(cfg.normalization == WNormalization::Columns)),
    );
    params.insert("data_scale".into(), out.data_scale);
    params.insert("rank_k".into(), out.rank_k as f64);
    params.insert("top_k".into(), top_k as f64);
    if let Some(last) = out.state.objective_trace.last() {
        params.insert("final_objective".into(), *last);
    }

    SelectionResult {
        scores: order.iter().map(|&i| norms[i]).collect(),
        selected: order,
        method: Method::Nmfqr,
        params,
        truncated: false,
        warnings: Vec::new(),
    }
}
