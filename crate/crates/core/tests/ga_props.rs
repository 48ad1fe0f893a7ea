mod common;

use common::uniform_matrix;
use qrsel::eval::LabeledDataset;
use qrsel::ga::{
    decode_segment, ga_run, qr_ga_select, Chromosome, ChromosomeLayout, FitnessEvaluator, GaConfig,
};
use qrsel::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn decoding_matches_integer_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..1000 {
        let l = rng.gen_range(1..=20);
        let bits: Vec<bool> = (0..l).map(|_| rng.gen_bool(0.5)).collect();
        let lo: f64 = rng.gen_range(-100.0..100.0);
        let hi = lo + rng.gen_range(0.001..500.0);
        let text: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        let rho = u64::from_str_radix(&text, 2).unwrap() as f64;
        let want = lo + (hi - lo) / ((1u64 << l) - 1) as f64 * rho;
        let got = decode_segment(&bits, lo, hi);
        assert!((got - want).abs() <= 1e-15 * want.abs().max(1.0), "{text}: {got} vs {want}");
        assert_eq!(decode_segment(&vec![false; l], lo, hi), lo);
        assert_eq!(decode_segment(&vec![true; l], lo, hi), hi);
    }
}

/// Features 0 and 1 decide the label together; feature 2 is noise.
fn toy() -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let n = 40;
    let x = DenseMatrix::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
    let y = (0..n).map(|i| usize::from(x[(i, 0)] + x[(i, 1)] > 0.0)).collect();
    LabeledDataset::new(x, y).unwrap()
}

fn all_chromosomes(layout: &ChromosomeLayout) -> Vec<Chromosome> {
    let total = layout.total_bits();
    (0u32..1 << total)
        .map(|code| (0..total).map(|b| code >> (total - 1 - b) & 1 == 1).collect::<Vec<bool>>())
        .map(|bits| Chromosome::new(bits, layout).unwrap())
        .filter(|c| !c.selected_features(layout).is_empty())
        .collect()
}

#[test]
fn finds_the_enumerated_optimum() {
    let data = toy();
    let layout = ChromosomeLayout::knn(3).unwrap();
    let cfg = GaConfig {
        seed: 5,
        ..Default::default()
    };
    let eval = FitnessEvaluator::new(&data, &layout, &cfg).unwrap();
    let best = all_chromosomes(&layout)
        .iter()
        .map(|c| eval.evaluate(c).unwrap().fitness)
        .fold(f64::INFINITY, f64::min);
    let run = ga_run(&data, &layout, &cfg).unwrap();
    assert_eq!(run.best.fitness, best);
}

#[test]
fn elitism_keeps_best_nonincreasing() {
    let data = toy();
    let layout = ChromosomeLayout::knn(3).unwrap();
    for seed in 0..3 {
        let cfg = GaConfig {
            seed,
            population: 12,
            generations: 25,
            elitism: 1,
            ..Default::default()
        };
        let run = ga_run(&data, &layout, &cfg).unwrap();
        assert_eq!(run.history.len(), 26);
        for w in run.history.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
        assert_eq!(run.history.last().unwrap().best, run.best.fitness);
        assert_eq!(run.best.fitness, run.best.recompute());
    }
}

#[test]
fn seeded_runs_repeat() {
    let data = toy();
    let layout = ChromosomeLayout::knn(3).unwrap();
    let cfg = GaConfig {
        seed: 17,
        population: 10,
        generations: 10,
        ..Default::default()
    };
    assert_eq!(ga_run(&data, &layout, &cfg).unwrap(), ga_run(&data, &layout, &cfg).unwrap());
}

#[test]
fn smaller_subset_wins_at_equal_error() {
    let data = toy();
    let layout = ChromosomeLayout::knn(3).unwrap();
    let cfg = GaConfig::default();
    let eval = FitnessEvaluator::new(&data, &layout, &cfg).unwrap();
    let two = Chromosome::new(vec![false, false, false, false, true, true, false], &layout).unwrap();
    let three = Chromosome::new(vec![false, false, false, false, true, true, true], &layout).unwrap();
    let a = eval.evaluate(&two).unwrap();
    let b = eval.evaluate(&three).unwrap();
    if a.cv_error == b.cv_error {
        assert!(a.fitness < b.fitness);
    }
    let w = cfg.omega_weight;
    let size_gap = (b.fitness - a.fitness) - w * (b.cv_error - a.cv_error);
    assert!((size_gap - (1.0 - w) / 3.0).abs() <= 1e-15);
}

#[test]
fn duplicated_features_are_filtered() {
    let base = uniform_matrix(30, 6, 63);
    let n = 12;
    // Column 2i and 2i+1 are the same feature.
    let x = DenseMatrix::from_fn(30, n, |r, c| base[(r, c / 2)]);
    let y = (0..30).map(|r| usize::from(base[(r, 0)] - base[(r, 3)] > 0.0)).collect();
    let data = LabeledDataset::new(x, y).unwrap();
    let cfg = GaConfig {
        population: 16,
        generations: 15,
        ..Default::default()
    };
    let out = qr_ga_select(&data, &cfg).unwrap();
    assert_eq!(out.filter.selected.len(), 6);
    let mut pairs: Vec<usize> = out.selection.selected.iter().map(|c| c / 2).collect();
    let before = pairs.len();
    pairs.sort_unstable();
    pairs.dedup();
    assert_eq!(pairs.len(), before);
    for c in &out.selection.selected {
        assert!(out.filter.selected.contains(c));
    }
}

#[test]
fn orthogonal_features_pass_the_filter() {
    let q = qrsel::matrix::householder_qr(&uniform_matrix(30, 5, 64)).unwrap().q;
    let x = q.block(0, 30, 0, 5).scale(5.0);
    let y = (0..30).map(|r| usize::from(x[(r, 1)] > 0.0)).collect();
    let data = LabeledDataset::new(x, y).unwrap();
    let cfg = GaConfig {
        population: 10,
        generations: 8,
        ..Default::default()
    };
    let out = qr_ga_select(&data, &cfg).unwrap();
    let mut kept = out.filter.selected.clone();
    kept.sort_unstable();
    assert_eq!(kept, vec![0, 1, 2, 3, 4]);

    // The GA then runs on the filtered columns, which are the original ones reordered.
    let reduced = data.subset_features(&out.filter.selected);
    let layout = ChromosomeLayout::knn(5).unwrap();
    let direct = ga_run(&reduced, &layout, &cfg).unwrap();
    assert_eq!(direct.best.fitness, out.ga.best.fitness);
}
