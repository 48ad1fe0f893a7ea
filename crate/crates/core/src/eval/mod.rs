//! Classifiers, metrics, DOB-SCV folds and the cross-validation driver.

mod cv;
mod folds;
mod knn;
mod metrics;
mod tree;

pub use cv::{
    cross_validate, ClassifierSpec, EvaluationReport, FeatureSelector, Features, FoldReport,
    MetricSummary,
};
pub use folds::{dobscv_folds, FoldAssignment};
pub use knn::knn_classify;
pub use metrics::{confusion, macro_metrics, metrics, ConfusionCounts, MetricVector};
pub use tree::{train_tree, tree_classify, TreeModel, TreeNode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Samples × features with densely coded class labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub x: DenseMatrix,
    pub y: Vec<usize>,
    pub class_count: usize,
    pub feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Validates label length, dense coding `0..class_count` with every
    /// class present, and at least two classes.
    pub fn new(x: DenseMatrix, y: Vec<usize>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} samples",
                y.len(),
                x.rows()
            )));
        }
        x.check_finite()?;
        let class_count = y.iter().max().map_or(0, |&c| c + 1);
        if class_count < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 classes, found {class_count}"
            )));
        }
        let counts = class_counts(&y, class_count);
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidInput(format!(
                "labels are not densely coded: class {missing} has no samples"
            )));
        }
        Ok(Self {
            x,
            y,
            class_count,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} features",
                names.len(),
                self.x.cols()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.y, self.class_count)
    }

    /// Rows subset; keeps `class_count` even if some class drops out.
    pub fn subset_rows(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            class_count: self.class_count,
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn subset_features(&self, cols: &[usize]) -> Self {
        Self {
            x: self.x.select_cols(cols),
            y: self.y.clone(),
            class_count: self.class_count,
            feature_names: self
                .feature_names
                .as_ref()
                .map(|n| cols.iter().map(|&c| n[c].clone()).collect()),
        }
    }
}

pub(crate) fn class_counts(y: &[usize], class_count: usize) -> Vec<usize> {
    let mut counts = vec![0; class_count];
    for &c in y {
        counts[c] += 1;
    }
    counts
}

/// Index of the largest count; ties go to the lowest class code.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        let x = DenseMatrix::zeros(3, 2);
        assert!(LabeledDataset::new(x.clone(), vec![0, 1]).is_err());
        assert!(LabeledDataset::new(x.clone(), vec![0, 0, 0]).is_err());
        assert!(LabeledDataset::new(x.clone(), vec![0, 2, 2]).is_err());
        let d = LabeledDataset::new(x, vec![0, 1, 1]).unwrap();
        assert_eq!(d.class_counts(), vec![1, 2]);
        assert!(d.clone().with_feature_names(vec!["a".into()]).is_err());
    }

    #[test]
    fn majority_ties_to_lowest() {
        assert_eq!(majority(&[2, 3, 3]), 1);
        assert_eq!(majority(&[0, 0]), 0);
    }
}
