//! Seeded synthetic datasets with planted structure.
//!
//! Used by the test suites and handy for trying the selectors without real
//! data. Every generator is deterministic in its seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::eval::LabeledDataset;
use crate::matrix::{householder_qr, DenseMatrix};

/// Columns grouped around planted signals.
#[derive(Clone, Debug)]
pub struct PlantedColumns {
    pub data: DenseMatrix,
    /// Signal group of each column.
    pub group_of: Vec<usize>,
    /// Standard deviation of the additive noise.
    pub noise: f64,
}

impl PlantedColumns {
    pub fn groups(&self) -> usize {
        self.group_of.iter().copied().max().map_or(0, |g| g + 1)
    }

    /// Distinct groups hit by `cols`.
    pub fn groups_covered(&self, cols: &[usize]) -> usize {
        let mut seen = vec![false; self.groups()];
        for &c in cols {
            seen[self.group_of[c]] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `k` orthogonal columns of norm `√rows`.
pub fn orthogonal_signals(rows: usize, k: usize, rng: &mut impl Rng) -> Result<DenseMatrix> {
    let q = householder_qr(&gaussian_matrix(rows, k, rng))?.q;
    Ok(q.block(0, rows, 0, k).scale((rows as f64).sqrt()))
}

/// `signals` orthogonal columns plus noisy copies scaled by a factor drawn
/// from `[1 − jitter, 1 + jitter]`, `n_cols` in total, shuffled. With
/// `keep_pure` the clean signals are among the columns.
pub fn planted_copies(
    rows: usize,
    n_cols: usize,
    signals: usize,
    noise: f64,
    jitter: f64,
    keep_pure: bool,
    seed: u64,
) -> Result<PlantedColumns> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = orthogonal_signals(rows, signals, &mut rng)?;
    let mut cols: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n_cols);
    for c in 0..n_cols {
        let g = c % signals;
        let pure = keep_pure && c < signals;
        let a: f64 = if pure || jitter == 0.0 {
            1.0
        } else {
            rng.gen_range(1.0 - jitter..1.0 + jitter)
        };
        let col = (0..rows)
            .map(|r| {
                let e: f64 = if pure { 0.0 } else { rng.sample(StandardNormal) };
                a * s[(r, g)] + noise * e
            })
            .collect();
        cols.push((g, col));
    }
    cols.shuffle(&mut rng);
    let group_of = cols.iter().map(|(g, _)| *g).collect();
    let data = DenseMatrix::from_col_major(rows, n_cols, cols.into_iter().flat_map(|(_, c)| c).collect())?;
    Ok(PlantedColumns {
        data,
        group_of,
        noise,
    })
}

/// A labeled set with a few informative features, noisy copies of them,
/// and pure-noise features, shuffled.
#[derive(Clone, Debug)]
pub struct PlantedLabeled {
    pub data: LabeledDataset,
    /// Original position of the informative features.
    pub informative: Vec<usize>,
    /// For each column: `Some(i)` if it is informative feature `i` or a copy of it.
    pub source: Vec<Option<usize>>,
}

pub fn planted_labeled(
    samples: usize,
    informative: usize,
    copies: usize,
    noise_features: usize,
    seed: u64,
) -> Result<PlantedLabeled> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = gaussian_matrix(samples, informative, &mut rng);
    let weights: Vec<f64> = (0..informative).map(|_| rng.gen_range(0.5..1.5)).collect();
    let y: Vec<usize> = (0..samples)
        .map(|r| {
            let score: f64 = (0..informative).map(|i| weights[i] * base[(r, i)]).sum();
            usize::from(score > 0.0)
        })
        .collect();

    let mut cols: Vec<(Option<usize>, Vec<f64>)> = Vec::new();
    for i in 0..informative {
        cols.push((Some(i), base.col(i).to_vec()));
    }
    for c in 0..copies {
        let i = c % informative;
        let a: f64 = rng.gen_range(0.5..1.5);
        let col = (0..samples)
            .map(|r| a * base[(r, i)] + 0.3 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        cols.push((Some(i), col));
    }
    for _ in 0..noise_features {
        cols.push((None, (0..samples).map(|_| rng.sample(StandardNormal)).collect()));
    }
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.shuffle(&mut rng);
    let source: Vec<Option<usize>> = order.iter().map(|&o| cols[o].0).collect();
    let informative_pos = (0..informative)
        .map(|i| order.iter().position(|&o| o == i).expect("informative column present"))
        .collect();
    let n = cols.len();
    let flat = order.iter().flat_map(|&o| cols[o].1.iter().copied()).collect();
    let x = DenseMatrix::from_col_major(samples, n, flat)?;
    Ok(PlantedLabeled {
        data: LabeledDataset::new(x, y)?,
        informative: informative_pos,
        source,
    })
}
