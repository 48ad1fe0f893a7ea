//! Distribution-optimally-balanced stratified cross-validation (DOB-SCV).
//!
//! Within each class, a random unassigned sample and its `n_folds − 1`
//! nearest unassigned same-class neighbours are dealt one per fold, so every
//! fold sees each local region of every class. Leftovers (fewer than
//! `n_folds`) go to distinct folds, smallest first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Fold index per sample.
    pub fold_of: Vec<usize>,
    pub n_folds: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    /// With a single fold the training set is every sample (resubstitution).
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        if self.n_folds == 1 {
            return (0..self.fold_of.len()).collect();
        }
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_folds];
        for &f in &self.fold_of {
            s[f] += 1;
        }
        s
    }
}

pub fn dobscv_folds(data: &LabeledDataset, n_folds: usize, seed: u64) -> Result<FoldAssignment> {
    if n_folds == 0 {
        return Err(Error::InvalidInput("n_folds must be >= 1".into()));
    }
    let counts = data.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count > 0 && count < n_folds {
            return Err(Error::ClassTooSmall {
                class,
                count,
                folds: n_folds,
            });
        }
    }

    let m = data.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![usize::MAX; m];
    let mut fold_size = vec![0usize; n_folds];
    let sqdist = |a: usize, b: usize| -> f64 {
        (0..data.n_features())
            .map(|c| {
                let d = data.x[(a, c)] - data.x[(b, c)];
                d * d
            })
            .sum()
    };

    for class in 0..data.class_count {
        let mut unassigned: Vec<usize> = (0..m).filter(|&i| data.y[i] == class).collect();
        while unassigned.len() >= n_folds {
            let seed_sample = unassigned.swap_remove(rng.gen_range(0..unassigned.len()));
            unassigned.sort_by(|&a, &b| {
                sqdist(seed_sample, a)
                    .total_cmp(&sqdist(seed_sample, b))
                    .then(a.cmp(&b))
            });
            let group: Vec<usize> = std::iter::once(seed_sample)
                .chain(unassigned.drain(..n_folds - 1))
                .collect();
            for (fold, &s) in group.iter().enumerate() {
                fold_of[s] = fold;
                fold_size[fold] += 1;
            }
            unassigned.sort_unstable();
        }
        let mut used = vec![false; n_folds];
        for s in unassigned {
            let fold = (0..n_folds)
                .filter(|&f| !used[f])
                .min_by_key(|&f| (fold_size[f], f))
                .expect("fewer leftovers than folds");
            used[fold] = true;
            fold_of[s] = fold;
            fold_size[fold] += 1;
        }
    }

    Ok(FoldAssignment {
        fold_of,
        n_folds,
        seed,
    })
}
