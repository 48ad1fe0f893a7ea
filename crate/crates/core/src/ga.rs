//! Hybrid QR-GA feature selection.
//!
//! Phase one keeps the leading `rank(A)` columns of a strong RRQR, which
//! removes linearly redundant features. Phase two runs a genetic algorithm
//! whose chromosomes carry classifier hyperparameters (binary segments
//! decoded onto `[min, max]`) followed by a feature mask. Fitness, lower is
//! better, is
//!
//! ```text
//! ω·cv_error + (1 − ω)·|subset| / |features|
//! ```
//!
//! with the error estimated by DOB-SCV cross-validation on the data the GA
//! is given.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{dobscv_folds, ClassifierSpec, FoldAssignment, LabeledDataset};
use crate::matrix::numerical_rank;
use crate::rrqr::{select_features_rrqr, DEFAULT_F};
use crate::selection::{Method, SelectionResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub bits: usize,
    pub min: f64,
    pub max: f64,
}

impl Segment {
    pub fn new(name: impl Into<String>, bits: usize, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            bits,
            min,
            max,
        }
    }
}

/// Hyperparameter segments first, then one bit per candidate feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChromosomeLayout {
    pub segments: Vec<Segment>,
    pub feature_bits: usize,
}

impl ChromosomeLayout {
    pub fn new(segments: Vec<Segment>, feature_bits: usize) -> Result<Self> {
        for s in &segments {
            if s.bits == 0 || s.bits > 52 {
                return Err(Error::InvalidInput(format!(
                    "segment {} must have 1..=52 bits, got {}",
                    s.name, s.bits
                )));
            }
            if !(s.max > s.min) || !s.min.is_finite() || !s.max.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "segment {} needs finite min < max, got [{}, {}]",
                    s.name, s.min, s.max
                )));
            }
        }
        if feature_bits == 0 {
            return Err(Error::InvalidInput("layout needs at least one feature bit".into()));
        }
        Ok(Self {
            segments,
            feature_bits,
        })
    }

    /// One 4-bit segment for the k-NN neighbour count, `k ∈ [1, 15]`.
    pub fn knn(feature_bits: usize) -> Result<Self> {
        Self::new(vec![Segment::new("k", 4, 1.0, 15.0)], feature_bits)
    }

    /// Tree depth in `[1, 8]` over 3 bits.
    pub fn tree(feature_bits: usize) -> Result<Self> {
        Self::new(vec![Segment::new("max_depth", 3, 1.0, 8.0)], feature_bits)
    }

    /// RBF-SVM layout (`C`, `gamma`). No SVM engine ships with this crate;
    /// the layout exists for decoding and for plugging in an external
    /// classifier.
    pub fn svm_example(feature_bits: usize) -> Result<Self> {
        Self::new(
            vec![
                Segment::new("C", 10, 0.1, 100.0),
                Segment::new("gamma", 10, 0.0001, 1.0),
            ],
            feature_bits,
        )
    }

    pub fn hyper_bits(&self) -> usize {
        self.segments.iter().map(|s| s.bits).sum()
    }

    pub fn total_bits(&self) -> usize {
        self.hyper_bits() + self.feature_bits
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub bits: Vec<bool>,
}

impl Chromosome {
    pub fn new(bits: Vec<bool>, layout: &ChromosomeLayout) -> Result<Self> {
        if bits.len() != layout.total_bits() {
            return Err(Error::DimensionMismatch(format!(
                "chromosome has {} bits, layout needs {}",
                bits.len(),
                layout.total_bits()
            )));
        }
        Ok(Self { bits })
    }

    pub fn random(layout: &ChromosomeLayout, rng: &mut impl Rng) -> Self {
        Self {
            bits: (0..layout.total_bits()).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    pub fn feature_mask<'a>(&'a self, layout: &ChromosomeLayout) -> &'a [bool] {
        &self.bits[layout.hyper_bits()..]
    }

    pub fn selected_features(&self, layout: &ChromosomeLayout) -> Vec<usize> {
        self.feature_mask(layout)
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn decode(&self, layout: &ChromosomeLayout) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut off = 0;
        for s in &layout.segments {
            out.insert(s.name.clone(), decode_segment(&self.bits[off..off + s.bits], s.min, s.max));
            off += s.bits;
        }
        out
    }

    /// Turns one uniformly chosen feature bit on if the mask is empty.
    pub fn repair(&mut self, layout: &ChromosomeLayout, rng: &mut impl Rng) {
        let h = layout.hyper_bits();
        if !self.bits[h..].iter().any(|&b| b) {
            let i = rng.gen_range(0..layout.feature_bits);
            self.bits[h + i] = true;
        }
    }
}

/// `min + (max − min)/(2^l − 1)·ρ`, `ρ` read most-significant bit first.
pub fn decode_segment(bits: &[bool], min: f64, max: f64) -> f64 {
    let l = bits.len();
    let rho = bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    let top = (1u64 << l) - 1;
    if rho == 0 {
        return min;
    }
    if rho == top {
        return max;
    }
    min + (max - min) / top as f64 * rho as f64
}

/// `ω·cv_error + (1 − ω)·subset_size/total`.
pub fn fitness(cv_error: f64, subset_size: usize, total: usize, omega_weight: f64) -> Result<f64> {
    if subset_size == 0 || subset_size > total {
        return Err(Error::InvalidInput(format!(
            "subset size must satisfy 0 < {subset_size} <= {total}"
        )));
    }
    if !(0.0..=1.0).contains(&cv_error) {
        return Err(Error::InvalidInput(format!("cv_error must lie in [0, 1], got {cv_error}")));
    }
    if !(omega_weight > 0.0 && omega_weight < 1.0) {
        return Err(Error::InvalidInput(format!(
            "omega_weight must lie in (0, 1), got {omega_weight}"
        )));
    }
    Ok(omega_weight * cv_error + (1.0 - omega_weight) * (subset_size as f64 / total as f64))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaClassifier {
    #[default]
    Knn,
    Tree,
    /// Decodes `C`/`gamma` but has no engine; every fold fails.
    Svm,
}

impl GaClassifier {
    pub fn layout(&self, feature_bits: usize) -> Result<ChromosomeLayout> {
        match self {
            GaClassifier::Knn => ChromosomeLayout::knn(feature_bits),
            GaClassifier::Tree => ChromosomeLayout::tree(feature_bits),
            GaClassifier::Svm => ChromosomeLayout::svm_example(feature_bits),
        }
    }

    /// Classifier for one fold. `n_train` bounds the k-NN neighbour count.
    fn build(&self, params: &BTreeMap<String, f64>, n_train: usize) -> Result<ClassifierSpec> {
        match self {
            GaClassifier::Knn => {
                let k = params.get("k").copied().unwrap_or(1.0).round().max(1.0) as usize;
                Ok(ClassifierSpec::Knn {
                    k: k.min(n_train.max(1)),
                })
            }
            GaClassifier::Tree => Ok(ClassifierSpec::Tree {
                max_depth: params.get("max_depth").copied().unwrap_or(5.0).round().max(1.0) as usize,
                min_leaf: params.get("min_leaf").copied().unwrap_or(1.0).round().max(1.0) as usize,
            }),
            GaClassifier::Svm => Err(Error::Classifier("no SVM engine is available".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Error/size trade-off ω, strictly inside (0, 1).
    pub omega_weight: f64,
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / total_bits`.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    pub seed: u64,
    pub cv_folds: usize,
    /// Swap bound for the RRQR filter phase.
    pub rrqr_f: f64,
    pub classifier: GaClassifier,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            omega_weight: 0.8,
            population: 50,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: None,
            tournament_size: 3,
            elitism: 2,
            seed: 0,
            cv_folds: 5,
            rrqr_f: DEFAULT_F,
            classifier: GaClassifier::Knn,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_weight > 0.0 && self.omega_weight < 1.0) {
            return Err(Error::InvalidInput(format!(
                "omega_weight must lie in (0, 1), got {}",
                self.omega_weight
            )));
        }
        if self.population < 2 {
            return Err(Error::InvalidInput("population must be >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::InvalidInput("crossover_rate must lie in [0, 1]".into()));
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidInput("mutation_rate must lie in [0, 1]".into()));
            }
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidInput("tournament_size must be >= 1".into()));
        }
        if self.elitism > self.population {
            return Err(Error::InvalidInput("elitism cannot exceed population".into()));
        }
        if self.cv_folds == 0 {
            return Err(Error::InvalidInput("cv_folds must be >= 1".into()));
        }
        if !(self.rrqr_f > 1.0) {
            return Err(Error::InvalidInput("rrqr_f must be > 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub fitness: f64,
    pub cv_error: f64,
    pub subset_size: usize,
    pub total_features: usize,
    pub omega_weight: f64,
    pub decoded_params: BTreeMap<String, f64>,
    pub chromosome: Chromosome,
    /// Folds whose classifier failed and were scored as error 1.0.
    pub failed_folds: usize,
}

impl FitnessRecord {
    pub fn recompute(&self) -> f64 {
        self.omega_weight * self.cv_error
            + (1.0 - self.omega_weight) * (self.subset_size as f64 / self.total_features as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness in this generation's population.
    pub best: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: FitnessRecord,
    pub history: Vec<GenerationStats>,
    /// GA-space feature indices of the best chromosome.
    pub selection: SelectionResult,
    pub evaluations: usize,
    pub cache_hits: usize,
}

/// Scores chromosomes against one dataset with a fixed fold assignment,
/// memoizing by bit pattern.
pub struct FitnessEvaluator<'a> {
    data: &'a LabeledDataset,
    layout: &'a ChromosomeLayout,
    cfg: &'a GaConfig,
    folds: FoldAssignment,
    cache: Mutex<HashMap<Chromosome, FitnessRecord>>,
    hits: Mutex<usize>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(data: &'a LabeledDataset, layout: &'a ChromosomeLayout, cfg: &'a GaConfig) -> Result<Self> {
        if data.n_features() != layout.feature_bits {
            return Err(Error::DimensionMismatch(format!(
                "dataset has {} features, layout has {} feature bits",
                data.n_features(),
                layout.feature_bits
            )));
        }
        let folds = dobscv_folds(data, cfg.cv_folds, cfg.seed)?;
        Ok(Self {
            data,
            layout,
            cfg,
            folds,
            cache: Mutex::new(HashMap::new()),
            hits: Mutex::new(0),
        })
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    pub fn cache_hits(&self) -> usize {
        *self.hits.lock().expect("hits poisoned")
    }

    pub fn evaluate(&self, chrom: &Chromosome) -> Result<FitnessRecord> {
        if chrom.bits.len() != self.layout.total_bits() {
            return Err(Error::DimensionMismatch("chromosome length does not match layout".into()));
        }
        if let Some(r) = self.cache.lock().expect("cache poisoned").get(chrom) {
            *self.hits.lock().expect("hits poisoned") += 1;
            return Ok(r.clone());
        }
        let rec = self.compute(chrom)?;
        self.cache
            .lock()
            .expect("cache poisoned")
            .entry(chrom.clone())
            .or_insert_with(|| rec.clone());
        Ok(rec)
    }

    fn compute(&self, chrom: &Chromosome) -> Result<FitnessRecord> {
        let cols = chrom.selected_features(self.layout);
        let params = chrom.decode(self.layout);
        let total = self.layout.feature_bits;
        let mut errors = Vec::with_capacity(self.folds.n_folds);
        let mut failed = 0;
        for fold in 0..self.folds.n_folds {
            let test = self.folds.test_indices(fold);
            if test.is_empty() {
                continue;
            }
            let train_rows = self.folds.train_indices(fold);
            let outcome = self
                .cfg
                .classifier
                .build(&params, train_rows.len())
                .and_then(|spec| {
                    let train = self.data.subset_rows(&train_rows).subset_features(&cols);
                    let queries = self.data.x.select_rows(&test).select_cols(&cols);
                    spec.fit_predict(&train, &queries)
                });
            match outcome {
                Ok(pred) => {
                    let wrong = pred.iter().zip(&test).filter(|(p, &t)| **p != self.data.y[t]).count();
                    errors.push(wrong as f64 / test.len() as f64);
                }
                Err(_) => {
                    failed += 1;
                    errors.push(1.0);
                }
            }
        }
        let cv_error = if errors.is_empty() {
            1.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        };
        Ok(FitnessRecord {
            fitness: fitness(cv_error, cols.len(), total, self.cfg.omega_weight)?,
            cv_error,
            subset_size: cols.len(),
            total_features: total,
            omega_weight: self.cfg.omega_weight,
            decoded_params: params,
            chromosome: chrom.clone(),
            failed_folds: failed,
        })
    }
}

/// Single-shot evaluation (fresh folds, no shared cache).
pub fn evaluate_chromosome(
    chrom: &Chromosome,
    layout: &ChromosomeLayout,
    data: &LabeledDataset,
    cfg: &GaConfig,
) -> Result<FitnessRecord> {
    cfg.validate()?;
    FitnessEvaluator::new(data, layout, cfg)?.evaluate(chrom)
}

/// Index of the lowest fitness; ties to the lower index.
fn argmin(records: &[FitnessRecord]) -> usize {
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.fitness < records[best].fitness {
            best = i;
        }
    }
    best
}

fn tournament(records: &[FitnessRecord], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.gen_range(0..records.len());
    for _ in 1..size {
        let c = rng.gen_range(0..records.len());
        if records[c].fitness < records[best].fitness
            || (records[c].fitness == records[best].fitness && c < best)
        {
            best = c;
        }
    }
    best
}

fn evaluate_population(eval: &FitnessEvaluator<'_>, pop: &[Chromosome]) -> Result<Vec<FitnessRecord>> {
    pop.par_iter().map(|c| eval.evaluate(c)).collect()
}

/// Generational GA: tournament selection, single-point crossover, per-bit
/// mutation, empty-mask repair and elitism.
pub fn ga_run(data: &LabeledDataset, layout: &ChromosomeLayout, cfg: &GaConfig) -> Result<GaResult> {
    cfg.validate()?;
    let eval = FitnessEvaluator::new(data, layout, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total_bits = layout.total_bits();
    let mutation = cfg.mutation_rate.unwrap_or(1.0 / total_bits as f64);

    let mut pop: Vec<Chromosome> = (0..cfg.population)
        .map(|_| {
            let mut c = Chromosome::random(layout, &mut rng);
            c.repair(layout, &mut rng);
            c
        })
        .collect();
    let mut scores = evaluate_population(&eval, &pop)?;
    let mut best = scores[argmin(&scores)].clone();
    let mut history = vec![stats(0, &scores)];

    for generation in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[a].fitness.total_cmp(&scores[b].fitness).then(a.cmp(&b)));
        let mut next: Vec<Chromosome> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();

        while next.len() < cfg.population {
            let p1 = &pop[tournament(&scores, cfg.tournament_size, &mut rng)];
            let p2 = &pop[tournament(&scores, cfg.tournament_size, &mut rng)];
            let (mut c1, mut c2) = (p1.clone(), p2.clone());
            if total_bits > 1 && rng.gen::<f64>() < cfg.crossover_rate {
                let cut = rng.gen_range(1..total_bits);
                for b in cut..total_bits {
                    c1.bits[b] = p2.bits[b];
                    c2.bits[b] = p1.bits[b];
                }
            }
            for child in [&mut c1, &mut c2] {
                for b in child.bits.iter_mut() {
                    if rng.gen::<f64>() < mutation {
                        *b = !*b;
                    }
                }
                child.repair(layout, &mut rng);
            }
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }

        pop = next;
        scores = evaluate_population(&eval, &pop)?;
        let gen_best = argmin(&scores);
        if scores[gen_best].fitness < best.fitness {
            best = scores[gen_best].clone();
        }
        history.push(stats(generation, &scores));
    }

    // Per-feature score: share of the final population that selects it.
    let selected = best.chromosome.selected_features(layout);
    let freq: Vec<f64> = selected
        .iter()
        .map(|&f| {
            let on = pop.iter().filter(|c| c.feature_mask(layout)[f]).count();
            on as f64 / pop.len() as f64
        })
        .collect();

    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    params.insert("omega_weight".into(), cfg.omega_weight);
    params.insert("population".into(), cfg.population as f64);
    params.insert("generations".into(), cfg.generations as f64);
    params.insert("seed".into(), cfg.seed as f64);
    params.insert("cv_folds".into(), cfg.cv_folds as f64);
    params.insert("best_fitness".into(), best.fitness);
    params.insert("best_cv_error".into(), best.cv_error);
    for (k, v) in &best.decoded_params {
        params.insert(format!("param.{k}"), *v);
    }

    let mut warnings = Vec::new();
    if best.failed_folds > 0 {
        warnings.push(format!(
            "{} fold(s) failed for the best chromosome and were scored as error 1.0",
            best.failed_folds
        ));
    }

    Ok(GaResult {
        selection: SelectionResult {
            selected,
            scores: freq,
            method: Method::QrGa,
            params,
            truncated: false,
            warnings,
        },
        best,
        history,
        evaluations: eval.evaluations(),
        cache_hits: eval.cache_hits(),
    })
}

fn stats(generation: usize, scores: &[FitnessRecord]) -> GenerationStats {
    GenerationStats {
        generation,
        best: scores[argmin(scores)].fitness,
        mean: scores.iter().map(|r| r.fitness).sum::<f64>() / scores.len() as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QrGaOutput {
    /// Final selection in original feature indices.
    pub selection: SelectionResult,
    /// RRQR filter result; its `selected` list is the GA's candidate space.
    pub filter: SelectionResult,
    pub ga: GaResult,
}

/// RRQR filter at `k = rank(X)` followed by the GA wrapper.
pub fn qr_ga_select(data: &LabeledDataset, cfg: &GaConfig) -> Result<QrGaOutput> {
    cfg.validate()?;
    let rank = numerical_rank(&data.x);
    if rank == 0 {
        return Err(Error::InvalidInput("feature matrix is numerically zero".into()));
    }
    let filter = select_features_rrqr(&data.x, rank, cfg.rrqr_f)?;
    let survivors = filter.selected.clone();
    let reduced = data.subset_features(&survivors);
    let layout = cfg.classifier.layout(survivors.len())?;
    let ga = ga_run(&reduced, &layout, cfg)?;

    let mut selection = ga.selection.clone();
    selection.selected = ga.selection.selected.iter().map(|&t| survivors[t]).collect();
    selection
        .params
        .insert("filter_rank".into(), rank as f64);
    selection.params.insert("rrqr_f".into(), cfg.rrqr_f);
    selection.warnings.extend(filter.warnings.iter().cloned());

    Ok(QrGaOutput {
        selection,
        filter,
        ga,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn decode_endpoints_and_midpoint() {
        assert_eq!(decode_segment(&bits("0000"), -3.5, 7.25), -3.5);
        assert_eq!(decode_segment(&bits("1111"), -3.5, 7.25), 7.25);
        let ten = bits("0111111111");
        let v = decode_segment(&ten, 0.1, 100.0);
        assert!((v - (0.1 + 99.9 / 1023.0 * 511.0)).abs() < 1e-12);
        assert!((v - 50.001_173).abs() < 1e-6);
        assert_eq!(decode_segment(&bits("10"), 0.0, 3.0), 2.0);
    }

    #[test]
    fn fitness_arithmetic() {
        assert!((fitness(0.1, 50, 1000, 0.8).unwrap() - 0.09).abs() < 1e-15);
        assert!((fitness(0.0, 7, 7, 0.8).unwrap() - 0.2).abs() < 1e-15);
        assert!((fitness(0.2, 10, 40, 0.5).unwrap() - 0.225).abs() < 1e-15);
        assert!(fitness(0.1, 0, 10, 0.5).is_err());
        assert!(fitness(0.1, 1, 10, 1.0).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(ChromosomeLayout::new(vec![Segment::new("x", 0, 0.0, 1.0)], 3).is_err());
        assert!(ChromosomeLayout::new(vec![Segment::new("x", 2, 1.0, 1.0)], 3).is_err());
        assert!(ChromosomeLayout::new(vec![], 0).is_err());
        let l = ChromosomeLayout::svm_example(10).unwrap();
        assert_eq!(l.total_bits(), 30);
    }

    #[test]
    fn repair_sets_a_feature() {
        let layout = ChromosomeLayout::knn(5).unwrap();
        let mut c = Chromosome::new(vec![true; 4].into_iter().chain(vec![false; 5]).collect(), &layout).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        c.repair(&layout, &mut rng);
        assert_eq!(c.selected_features(&layout).len(), 1);
        assert!(c.bits[..4].iter().all(|&b| b));
    }

    fn separable_toy() -> LabeledDataset {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let t = i as f64;
            rows.push(vec![t * 0.1, (t * 1.7).sin()]);
            y.push(0);
            rows.push(vec![5.0 + t * 0.1, (t * 2.3).cos()]);
            y.push(1);
        }
        LabeledDataset::new(DenseMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn separable_all_features_zero_error() {
        let data = separable_toy();
        let layout = ChromosomeLayout::knn(2).unwrap();
        let cfg = GaConfig::default();
        // k segment 0000 -> k = 1; both features on.
        let c = Chromosome::new(bits("000011"), &layout).unwrap();
        let rec = evaluate_chromosome(&c, &layout, &data, &cfg).unwrap();
        assert_eq!(rec.cv_error, 0.0);
        assert!((rec.fitness - 0.2).abs() < 1e-15);
        assert_eq!(rec.decoded_params["k"], 1.0);
        assert_eq!(rec.fitness, rec.recompute());
    }

    #[test]
    fn svm_layout_fails_every_fold() {
        let data = separable_toy();
        let layout = ChromosomeLayout::svm_example(2).unwrap();
        let cfg = GaConfig {
            classifier: GaClassifier::Svm,
            ..Default::default()
        };
        let mut b = vec![false; 20];
        b.extend([true, true]);
        let rec = evaluate_chromosome(&Chromosome::new(b, &layout).unwrap(), &layout, &data, &cfg).unwrap();
        assert_eq!(rec.failed_folds, 5);
        assert_eq!(rec.cv_error, 1.0);
    }

    #[test]
    fn cache_counts_hits() {
        let data = separable_toy();
        let layout = ChromosomeLayout::knn(2).unwrap();
        let cfg = GaConfig::default();
        let ev = FitnessEvaluator::new(&data, &layout, &cfg).unwrap();
        let c = Chromosome::new(bits("001010"), &layout).unwrap();
        let a = ev.evaluate(&c).unwrap();
        let b = ev.evaluate(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(ev.evaluations(), 1);
        assert_eq!(ev.cache_hits(), 1);
    }

    #[test]
    fn zero_generations_returns_initial_best() {
        let data = separable_toy();
        let layout = ChromosomeLayout::knn(2).unwrap();
        let cfg = GaConfig {
            generations: 0,
            population: 8,
            ..Default::default()
        };
        let r = ga_run(&data, &layout, &cfg).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.history[0].best, r.best.fitness);
    }

    #[test]
    fn config_validation() {
        let bad = GaConfig {
            omega_weight: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            population: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            elitism: 60,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
