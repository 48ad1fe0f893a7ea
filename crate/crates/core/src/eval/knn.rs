use super::{majority, LabeledDataset};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Euclidean k-nearest-neighbour majority vote.
///
/// Distance ties go to the lower training index; vote ties to the lower
/// class code.
pub fn knn_classify(train: &LabeledDataset, queries: &DenseMatrix, k: usize) -> Result<Vec<usize>> {
    let n = train.n_samples();
    if n == 0 {
        return Err(Error::InvalidInput("k-NN training set is empty".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k-NN needs 1 <= k <= {n} training samples, got k = {k}"
        )));
    }
    if queries.cols() != train.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "queries have {} features, training data {}",
            queries.cols(),
            train.n_features()
        )));
    }
    let p = train.n_features();
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(queries.rows());
    for q in 0..queries.rows() {
        dist.clear();
        for t in 0..n {
            let mut s = 0.0;
            for c in 0..p {
                let d = queries[(q, c)] - train.x[(t, c)];
                s += d * d;
            }
            dist.push((s, t));
        }
        if k < n {
            dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let mut votes = vec![0usize; train.class_count];
        for &(_, t) in &dist[..k] {
            votes[train.y[t]] += 1;
        }
        out.push(majority(&votes));
    }
    Ok(out)
}
