use thiserror::Error;

use crate::rrqr::RrqrFactorization;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimension {dim} exceeds the oracle cap of {cap}")]
    OverCap { dim: usize, cap: usize },

    #[error("R11 is numerically singular at diagonal index {index} (|r| = {value:e})")]
    RankDeficient {
        index: usize,
        value: f64,
        partial: Option<Box<RrqrFactorization>>,
    },

    #[error("strong RRQR did not terminate within {max_swaps} swaps (f = {f}); f is too close to 1 for the working precision")]
    NonTermination { max_swaps: usize, f: f64 },

    #[error("numerical failure at iteration {iteration}: {what}")]
    NumericalFailure { iteration: usize, what: String },

    #[error("degenerate NMF-QR state at iteration {iteration}: AW has no singular value above the cutoff; try a smaller rank_k or a different seed")]
    DegenerateState { iteration: usize },

    #[error("class {class} has {count} samples, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("classifier failure: {0}")]
    Classifier(String),
}

pub type Result<T> = std::result::Result<T, Error>;
