//! Axis-aligned decision tree grown greedily on information gain.
//!
//! Stands in for C4.5: entropy gain, thresholds at midpoints between sorted
//! distinct values, majority-class leaves, no pruning.

use serde::{Deserialize, Serialize};

use super::{class_counts, majority, LabeledDataset};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Samples with `x[feature] <= threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub n_features: usize,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        fn d(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

struct Grower<'a> {
    data: &'a LabeledDataset,
    max_depth: usize,
    min_leaf: usize,
}

impl Grower<'_> {
    fn grow(&self, rows: &[usize], depth: usize) -> TreeNode {
        let y = &self.data.y;
        let k = self.data.class_count;
        let mut counts = vec![0usize; k];
        for &r in rows {
            counts[y[r]] += 1;
        }
        let leaf = TreeNode::Leaf {
            class: majority(&counts),
        };
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return leaf;
        }

        let parent = entropy(&counts, rows.len());
        // (gain, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in 0..self.data.n_features() {
            let x = |r: usize| self.data.x[(r, f)];
            sorted.sort_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
            let mut left = vec![0usize; k];
            let n = sorted.len();
            for p in 0..n - 1 {
                left[y[sorted[p]]] += 1;
                let (lo, hi) = (x(sorted[p]), x(sorted[p + 1]));
                if lo == hi {
                    continue;
                }
                let nl = p + 1;
                let nr = n - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let child = (nl as f64 * entropy(&left, nl) + nr as f64 * entropy(&right, nr)) / n as f64;
                let gain = parent - child;
                let threshold = 0.5 * (lo + hi);
                let better = match best {
                    None => true,
                    Some((g, _, _)) => gain > g + 1e-12,
                };
                if better {
                    best = Some((gain, f, threshold));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&row| self.data.x[(row, feature)] <= threshold);
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

/// Grows a tree. Impure nodes split on the best available threshold even at
/// zero gain (XOR-style interactions need it), subject to `max_depth` and
/// `min_leaf`.
pub fn train_tree(train: &LabeledDataset, max_depth: usize, min_leaf: usize) -> Result<TreeModel> {
    if min_leaf == 0 {
        return Err(Error::InvalidInput("min_leaf must be >= 1".into()));
    }
    if train.n_samples() == 0 {
        return Err(Error::InvalidInput("tree training set is empty".into()));
    }
    let rows: Vec<usize> = (0..train.n_samples()).collect();
    let grower = Grower {
        data: train,
        max_depth,
        min_leaf,
    };
    debug_assert_eq!(class_counts(&train.y, train.class_count).iter().sum::<usize>(), rows.len());
    Ok(TreeModel {
        root: grower.grow(&rows, 0),
        n_features: train.n_features(),
    })
}

pub fn tree_classify(model: &TreeModel, queries: &DenseMatrix) -> Result<Vec<usize>> {
    if queries.cols() != model.n_features {
        return Err(Error::DimensionMismatch(format!(
            "queries have {} features, tree expects {}",
            queries.cols(),
            model.n_features
        )));
    }
    Ok((0..queries.rows())
        .map(|q| {
            let mut node = &model.root;
            loop {
                match node {
                    TreeNode::Leaf { class } => break *class,
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        node = if queries[(q, *feature)] <= *threshold {
                            left
                        } else {
                            right
                        };
                    }
                }
            }
        })
        .collect())
}
