//! Feature selection built on strong rank-revealing QR.
//!
//! Three selectors share one factorization core:
//!
//! - [`rrqr`]: strong RRQR (determinant-increasing column swaps on top of
//!   pivoted QR); the leading `k` columns of the permutation are the
//!   selected features.
//! - [`nmfqr`]: an NMF-style objective whose representation is the `[R11 R12]`
//!   block of a QR, with graph-Laplacian structure preservation and an
//!   ℓ2,1/2 row-sparsity penalty on the feature-weight matrix.
//! - [`ga`]: a two-phase hybrid; strong RRQR at `k = rank(A)` filters
//!   redundant columns, then a genetic algorithm searches feature masks and
//!   classifier hyperparameters together.
//!
//! [`eval`] holds the classifiers, metrics and DOB-SCV cross-validation used
//! to score selections. Matrices are samples × features everywhere.

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod ga;
pub mod matrix;
pub mod nmfqr;
pub mod rrqr;
pub mod selection;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use selection::{Method, SelectionResult};
