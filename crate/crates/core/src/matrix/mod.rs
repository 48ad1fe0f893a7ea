//! Dense matrices and the baseline factorizations everything else builds on.

mod dense;
mod qr;
mod svd;

pub use dense::{dot, norm2, DenseMatrix};
pub(crate) use qr::retriangularize;
pub use qr::{column_pivoted_qr, householder_qr, QrResult, PIVOT_TIE_RTOL};
pub use svd::{
    jacobi_svd, jacobi_svd_with, kahan_matrix, numerical_rank, pseudoinverse,
    rank_from_singular_values, SvdResult, DEFAULT_ORACLE_CAP, PINV_RTOL,
};
