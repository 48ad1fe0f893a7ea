use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    confusion, knn_classify, macro_metrics, metrics, train_tree, tree_classify, ConfusionCounts,
    FoldAssignment, LabeledDataset, MetricVector,
};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierSpec {
    Knn { k: usize },
    Tree { max_depth: usize, min_leaf: usize },
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Knn { k: 3 }
    }
}

impl ClassifierSpec {
    pub fn fit_predict(&self, train: &LabeledDataset, queries: &DenseMatrix) -> Result<Vec<usize>> {
        match *self {
            ClassifierSpec::Knn { k } => knn_classify(train, queries, k),
            ClassifierSpec::Tree {
                max_depth,
                min_leaf,
            } => tree_classify(&train_tree(train, max_depth, min_leaf)?, queries),
        }
    }
}

/// Chooses features from a training portion only.
pub trait FeatureSelector: Sync {
    fn select(&self, train: &LabeledDataset) -> Result<Vec<usize>>;
}

impl<F> FeatureSelector for F
where
    F: Fn(&LabeledDataset) -> Result<Vec<usize>> + Sync,
{
    fn select(&self, train: &LabeledDataset) -> Result<Vec<usize>> {
        self(train)
    }
}

#[derive(Clone, Copy)]
pub enum Features<'a> {
    All,
    Fixed(&'a [usize]),
    /// Re-run on each training fold.
    Selector(&'a dyn FeatureSelector),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Features used in this fold, when a selector chose them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<usize>>,
    /// Counts against the positive class.
    pub confusion: ConfusionCounts,
    pub metrics: MetricVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: MetricVector,
    /// Sample standard deviation over folds (0 with fewer than two values).
    pub sd: MetricVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_folds: usize,
    pub positive_class: usize,
    pub class_count: usize,
    pub classifier: ClassifierSpec,
    pub folds: Vec<FoldReport>,
    pub pooled_confusion: ConfusionCounts,
    /// Metrics over all held-out predictions pooled together. Binary tasks
    /// use the positive class; multiclass tasks use one-vs-rest macro
    /// averages with overall accuracy.
    pub pooled: MetricVector,
    pub summary: MetricSummary,
}

impl EvaluationReport {
    pub fn accuracy(&self) -> f64 {
        self.pooled.accuracy.unwrap_or(0.0)
    }

    /// Mean over folds of the held-out error rate.
    pub fn mean_fold_error(&self) -> f64 {
        let errs: Vec<f64> = self
            .folds
            .iter()
            .filter(|f| f.n_test > 0)
            .map(|f| 1.0 - f.metrics.accuracy.unwrap_or(0.0))
            .collect();
        if errs.is_empty() {
            1.0
        } else {
            errs.iter().sum::<f64>() / errs.len() as f64
        }
    }
}

fn summarize(pred: &[usize], truth: &[usize], class_count: usize, positive: usize) -> Result<(ConfusionCounts, MetricVector)> {
    let c = confusion(pred, truth, positive)?;
    let m = if class_count <= 2 {
        metrics(&c)
    } else {
        macro_metrics(pred, truth, class_count)?
    };
    Ok((c, m))
}

fn mean_sd(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.iter().flatten().copied().collect();
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() < 2 {
        0.0
    } else {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

/// Runs every fold: select features on the training rows (when a selector is
/// given), fit the classifier, predict the held-out rows.
pub fn cross_validate(
    data: &LabeledDataset,
    features: Features<'_>,
    classifier: &ClassifierSpec,
    folds: &FoldAssignment,
    positive_class: usize,
) -> Result<EvaluationReport> {
    if folds.fold_of.len() != data.n_samples() {
        return Err(Error::DimensionMismatch(format!(
            "fold assignment covers {} samples, dataset has {}",
            folds.fold_of.len(),
            data.n_samples()
        )));
    }
    if positive_class >= data.class_count {
        return Err(Error::InvalidInput(format!(
            "positive class {positive_class} out of range for {} classes",
            data.class_count
        )));
    }
    if let Features::Fixed(cols) = features {
        if cols.is_empty() || cols.iter().any(|&c| c >= data.n_features()) {
            return Err(Error::InvalidInput("fixed feature subset is empty or out of range".into()));
        }
    }

    let per_fold: Vec<Result<(FoldReport, Vec<usize>, Vec<usize>)>> = (0..folds.n_folds)
        .into_par_iter()
        .map(|fold| {
            let train_rows = folds.train_indices(fold);
            let test_rows = folds.test_indices(fold);
            let train = data.subset_rows(&train_rows);
            let (cols, selected) = match features {
                Features::All => ((0..data.n_features()).collect::<Vec<_>>(), None),
                Features::Fixed(c) => (c.to_vec(), None),
                Features::Selector(s) => {
                    let c = s.select(&train)?;
                    if c.is_empty() || c.iter().any(|&j| j >= data.n_features()) {
                        return Err(Error::InvalidInput(format!(
                            "selector returned an invalid subset in fold {fold}"
                        )));
                    }
                    (c.clone(), Some(c))
                }
            };
            let truth: Vec<usize> = test_rows.iter().map(|&i| data.y[i]).collect();
            let pred = if test_rows.is_empty() {
                Vec::new()
            } else {
                let train = train.subset_features(&cols);
                let queries = data.x.select_rows(&test_rows).select_cols(&cols);
                classifier.fit_predict(&train, &queries)?
            };
            let (confusion, metrics) = summarize(&pred, &truth, data.class_count, positive_class)?;
            Ok((
                FoldReport {
                    fold,
                    n_train: train_rows.len(),
                    n_test: test_rows.len(),
                    selected,
                    confusion,
                    metrics,
                },
                pred,
                truth,
            ))
        })
        .collect();

    let mut reports = Vec::with_capacity(folds.n_folds);
    let mut all_pred = Vec::new();
    let mut all_truth = Vec::new();
    for r in per_fold {
        let (rep, p, t) = r?;
        all_pred.extend(p);
        all_truth.extend(t);
        reports.push(rep);
    }
    let (pooled_confusion, pooled) = summarize(&all_pred, &all_truth, data.class_count, positive_class)?;

    let mut means = [None; 7];
    let mut sds = [None; 7];
    for t in 0..7 {
        let col: Vec<Option<f64>> = reports.iter().map(|r| r.metrics.values()[t]).collect();
        let (m, s) = mean_sd(&col);
        means[t] = m;
        sds[t] = s;
    }

    Ok(EvaluationReport {
        n_folds: folds.n_folds,
        positive_class,
        class_count: data.class_count,
        classifier: classifier.clone(),
        folds: reports,
        pooled_confusion,
        pooled,
        summary: MetricSummary {
            mean: MetricVector::from_values(means),
            sd: MetricVector::from_values(sds),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::dobscv_folds;
    use crate::test_util::random_matrix;
    use std::sync::Mutex;

    fn separable(n_per: usize) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_per {
            rows.push(vec![i as f64 * 0.1, 0.0]);
            y.push(0);
            rows.push(vec![10.0 + i as f64 * 0.1, 0.0]);
            y.push(1);
        }
        LabeledDataset::new(DenseMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn perfect_on_separable() {
        let d = separable(10);
        let folds = dobscv_folds(&d, 5, 1).unwrap();
        let r = cross_validate(&d, Features::All, &ClassifierSpec::Knn { k: 1 }, &folds, 1).unwrap();
        assert_eq!(r.accuracy(), 1.0);
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r.pooled_confusion.total(), 20);
    }

    #[test]
    fn constant_classifier_on_balanced() {
        let d = separable(10);
        let folds = dobscv_folds(&d, 5, 1).unwrap();
        // k = train size predicts the training majority; balanced folds tie to class 0.
        let r = cross_validate(&d, Features::All, &ClassifierSpec::Knn { k: 16 }, &folds, 1).unwrap();
        assert!((r.accuracy() - 0.5).abs() <= 0.1);
    }

    #[test]
    fn selector_sees_only_training_rows() {
        // Feature 0 carries the sample index so the selector can report rows.
        let n = 20;
        let x = DenseMatrix::from_fn(n, 3, |i, j| if j == 0 { i as f64 } else { (i * j) as f64 });
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let d = LabeledDataset::new(x, y).unwrap();
        let folds = dobscv_folds(&d, 4, 9).unwrap();
        let seen = Mutex::new(Vec::new());
        let sel = |train: &LabeledDataset| -> Result<Vec<usize>> {
            let rows: Vec<usize> = (0..train.n_samples()).map(|i| train.x[(i, 0)] as usize).collect();
            seen.lock().unwrap().push(rows);
            Ok(vec![1, 2])
        };
        let r = cross_validate(&d, Features::Selector(&sel), &ClassifierSpec::Knn { k: 1 }, &folds, 1).unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), 4);
        for rows in &seen {
            // Identify the fold by the rows it lacks.
            let missing: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
            let fold = folds.fold_of[missing[0]];
            assert_eq!(missing, folds.test_indices(fold));
        }
        assert!(r.folds.iter().all(|f| f.selected.as_deref() == Some(&[1, 2][..])));
    }

    #[test]
    fn deterministic() {
        let x = random_matrix(30, 4, 3);
        let y: Vec<usize> = (0..30).map(|i| usize::from(x[(i, 0)] > 0.0)).collect();
        let d = LabeledDataset::new(x, y).unwrap();
        let folds = dobscv_folds(&d, 3, 2).unwrap();
        let spec = ClassifierSpec::Tree {
            max_depth: 3,
            min_leaf: 1,
        };
        let a = cross_validate(&d, Features::Fixed(&[0, 2]), &spec, &folds, 1).unwrap();
        let b = cross_validate(&d, Features::Fixed(&[0, 2]), &spec, &folds, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = separable(5);
        let folds = dobscv_folds(&d, 5, 0).unwrap();
        let spec = ClassifierSpec::Knn { k: 1 };
        assert!(cross_validate(&d, Features::Fixed(&[]), &spec, &folds, 1).is_err());
        assert!(cross_validate(&d, Features::Fixed(&[7]), &spec, &folds, 1).is_err());
        assert!(cross_validate(&d, Features::All, &spec, &folds, 2).is_err());
    }
}
