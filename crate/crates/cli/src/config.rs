//! Flat run configuration: built-in defaults, then a TOML file, then
//! command-line overrides.

use std::path::Path;

use qrsel::eval::ClassifierSpec;
use qrsel::ga::{GaClassifier, GaConfig};
use qrsel::nmfqr::{NmfQrConfig, WNormalization};
use qrsel::Method;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Select,
    Evaluate,
    FSweep,
    Factorize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    #[default]
    Knn,
    Tree,
}

/// Every knob of a run. Unknown keys in a config file are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub method: Method,
    pub data: Option<String>,
    /// Header name or zero-based column index; the last column when unset.
    pub label_col: Option<String>,
    /// The file stores features as rows and samples as columns.
    pub transpose: bool,
    /// Features to select; `min(10, n_features)` when unset.
    pub top_k: Option<usize>,
    /// RRQR swap bound, also used by the QR-GA filter.
    pub f: f64,
    /// Seeds folds, NMF initialization and the GA.
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    /// Fixed feature indices for `evaluate`; otherwise `method` runs per fold.
    pub features: Option<Vec<usize>>,
    /// Cross-validation folds for the reported evaluation; 0 skips it in `select`.
    pub folds: usize,
    /// Original label value treated as positive; code 1 when unset.
    pub positive_class: Option<String>,
    pub classifier: ClassifierKind,
    pub knn_k: usize,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,

    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,

    pub nmf_alpha: f64,
    pub nmf_beta: f64,
    pub nmf_gamma_sparse: f64,
    pub nmf_epsilon: f64,
    pub nmf_knn_k: usize,
    pub nmf_kernel_bandwidth: Option<f64>,
    pub nmf_max_iters: usize,
    pub nmf_rank_k: Option<usize>,
    pub nmf_normalization: WNormalization,

    pub ga_omega_weight: f64,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub ga_crossover_rate: f64,
    pub ga_mutation_rate: Option<f64>,
    pub ga_tournament_size: usize,
    pub ga_elitism: usize,
    pub ga_cv_folds: usize,
    pub ga_classifier: GaClassifier,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nmf = NmfQrConfig::default();
        let ga = GaConfig::default();
        Self {
            command: Command::Select,
            method: Method::Rrqr,
            data: None,
            label_col: None,
            transpose: false,
            top_k: None,
            f: qrsel::rrqr::DEFAULT_F,
            seed: 0,
            out: None,
            format: Format::Json,
            features: None,
            folds: 5,
            positive_class: None,
            classifier: ClassifierKind::Knn,
            knn_k: 3,
            tree_max_depth: 8,
            tree_min_leaf: 1,
            f_min: 1.02,
            f_max: 1.30,
            f_step: 0.02,
            nmf_alpha: nmf.alpha,
            nmf_beta: nmf.beta,
            nmf_gamma_sparse: nmf.gamma_sparse,
            nmf_epsilon: nmf.epsilon,
            nmf_knn_k: nmf.knn_k,
            nmf_kernel_bandwidth: nmf.kernel_bandwidth,
            nmf_max_iters: nmf.max_iters,
            nmf_rank_k: nmf.rank_k,
            nmf_normalization: nmf.normalization,
            ga_omega_weight: ga.omega_weight,
            ga_population: ga.population,
            ga_generations: ga.generations,
            ga_crossover_rate: ga.crossover_rate,
            ga_mutation_rate: ga.mutation_rate,
            ga_tournament_size: ga.tournament_size,
            ga_elitism: ga.elitism,
            ga_cv_folds: ga.cv_folds,
            ga_classifier: ga.classifier,
        }
    }
}

impl RunConfig {
    /// Layers `overrides` over the file at `file` over the defaults. The
    /// subcommand always wins over a `command` key in the file.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: toml::Table) -> Result<Self> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        table.extend(overrides);
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Usage(format!("invalid configuration: {}", e.to_string().trim_end())))?;
        cfg.command = command;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.data.is_none() {
            return bad("no dataset given (--data or `data` in the config file)".into());
        }
        if !(self.f > 1.0) || !self.f.is_finite() {
            return bad(format!("f must be > 1, got {}", self.f));
        }
        if self.top_k == Some(0) {
            return bad("top_k must be >= 1".into());
        }
        if self.knn_k == 0 {
            return bad("knn_k must be >= 1".into());
        }
        if self.command == Command::Evaluate && self.folds == 0 {
            return bad("evaluate needs folds >= 1".into());
        }
        if self.command == Command::FSweep {
            if self.folds == 0 {
                return bad("f-sweep needs folds >= 1".into());
            }
            if !(self.f_min > 1.0 && self.f_step > 0.0 && self.f_max >= self.f_min) {
                return bad(format!(
                    "f grid needs 1 < f_min <= f_max and f_step > 0, got {}..{} step {}",
                    self.f_min, self.f_max, self.f_step
                ));
            }
        }
        self.nmf_config().validate()?;
        self.ga_config().validate()?;
        Ok(())
    }

    pub fn classifier_spec(&self) -> ClassifierSpec {
        match self.classifier {
            ClassifierKind::Knn => ClassifierSpec::Knn { k: self.knn_k },
            ClassifierKind::Tree => ClassifierSpec::Tree {
                max_depth: self.tree_max_depth,
                min_leaf: self.tree_min_leaf,
            },
        }
    }

    pub fn nmf_config(&self) -> NmfQrConfig {
        NmfQrConfig {
            alpha: self.nmf_alpha,
            beta: self.nmf_beta,
            gamma_sparse: self.nmf_gamma_sparse,
            epsilon: self.nmf_epsilon,
            knn_k: self.nmf_knn_k,
            kernel_bandwidth: self.nmf_kernel_bandwidth,
            max_iters: self.nmf_max_iters,
            seed: self.seed,
            rank_k: self.nmf_rank_k,
            normalization: self.nmf_normalization,
        }
    }

    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            omega_weight: self.ga_omega_weight,
            population: self.ga_population,
            generations: self.ga_generations,
            crossover_rate: self.ga_crossover_rate,
            mutation_rate: self.ga_mutation_rate,
            tournament_size: self.ga_tournament_size,
            elitism: self.ga_elitism,
            seed: self.seed,
            cv_folds: self.ga_cv_folds,
            rrqr_f: self.f,
            classifier: self.ga_classifier,
        }
    }

    /// Grid points `f_min + i·f_step` up to `f_max`, rounded to 12 decimals.
    pub fn f_grid(&self) -> Vec<f64> {
        let steps = ((self.f_max - self.f_min) / self.f_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| ((self.f_min + i as f64 * self.f_step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// Parses `key=value`; the value is read as a TOML literal, falling back to a
/// bare string.
pub fn parse_assignment(s: &str) -> Result<(String, toml::Value)> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected key=value, got {s:?}")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}
