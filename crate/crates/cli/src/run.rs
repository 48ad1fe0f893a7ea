use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use qrsel::eval::{cross_validate, dobscv_folds, EvaluationReport, Features, LabeledDataset};
use qrsel::ga::qr_ga_select;
use qrsel::matrix::numerical_rank;
use qrsel::nmfqr::{nmfqr_run, nmfqr_select, rank_features};
use qrsel::rrqr::{select_features_rrqr, strong_rrqr, RrqrConfig};
use qrsel::{Method, SelectionResult};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::data::{load_csv, LoadedData};
use crate::error::{CliError, Result};
use crate::report::{FactorizationSummary, GaSummary, NmfSummary, Report, SweepRow, SCHEMA_VERSION};

struct Timer {
    phases: BTreeMap<String, f64>,
    start: Instant,
}

impl Timer {
    fn new() -> Self {
        Self {
            phases: BTreeMap::new(),
            start: Instant::now(),
        }
    }

    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.phases.entry(phase.to_string()).or_insert(0.0) += t.elapsed().as_secs_f64();
        out
    }

    fn finish(mut self) -> BTreeMap<String, f64> {
        self.phases.insert("total".into(), self.start.elapsed().as_secs_f64());
        self.phases
    }
}

fn positive_class(cfg: &RunConfig, data: &LoadedData) -> Result<usize> {
    match &cfg.positive_class {
        Some(label) => data.class_code(label).ok_or_else(|| {
            CliError::Usage(format!(
                "positive_class {label:?} is not one of the labels {:?}",
                data.classes
            ))
        }),
        None => Ok(1),
    }
}

/// One selector run on a feature matrix (no labels needed except for qr-ga).
fn select(cfg: &RunConfig, data: &LabeledDataset, top_k: usize) -> Result<SelectionResult> {
    Ok(match cfg.method {
        Method::Rrqr => select_features_rrqr(&data.x, top_k, cfg.f)?,
        Method::Nmfqr => nmfqr_select(&data.x, &cfg.nmf_config(), top_k)?,
        Method::QrGa => qr_ga_select(data, &cfg.ga_config())?.selection,
    })
}

fn undefined(ev: &EvaluationReport) -> Vec<String> {
    ev.pooled.undefined().into_iter().map(String::from).collect()
}

/// Loads the dataset named in `cfg` and runs the configured command.
pub fn run(mut cfg: RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut timer = Timer::new();
    let path = cfg.data.clone().unwrap_or_default();
    let loaded = timer.time("load", || load_csv(Path::new(&path), cfg.label_col.as_deref(), cfg.transpose))?;
    let data = &loaded.dataset;
    let n = data.n_features();

    cfg.label_col = Some(loaded.label_column.clone());
    let top_k = cfg.top_k.unwrap_or(10.min(n));
    if top_k > n {
        return Err(CliError::Usage(format!("top_k {top_k} exceeds the {n} features")));
    }
    cfg.top_k = Some(top_k);
    let positive = positive_class(&cfg, &loaded)?;
    if positive >= data.class_count {
        return Err(CliError::Usage(format!(
            "default positive class code 1 needs at least two classes, found {}",
            data.class_count
        )));
    }
    let classifier = cfg.classifier_spec();

    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        tool: "qrsel".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cfg.command,
        config: cfg.clone(),
        dataset: loaded.info(&path),
        selection: None,
        selected_names: None,
        evaluation: None,
        undefined_metrics: Vec::new(),
        f_sweep: None,
        factorization: None,
        nmf: None,
        ga: None,
        timing: BTreeMap::new(),
        warnings: Vec::new(),
    };

    match cfg.command {
        Command::Select => {
            let sel = match cfg.method {
                Method::QrGa => {
                    let out = timer.time("select", || qr_ga_select(data, &cfg.ga_config()))?;
                    report.ga = Some(GaSummary {
                        filter_rank: out.filter.selected.len(),
                        filter_selected: out.filter.selected.clone(),
                        best_fitness: out.ga.best.fitness,
                        cv_error: out.ga.best.cv_error,
                        subset_size: out.ga.best.subset_size,
                        decoded_params: out.ga.best.decoded_params.clone(),
                        history: out.ga.history.clone(),
                        evaluations: out.ga.evaluations,
                        cache_hits: out.ga.cache_hits,
                    });
                    if out.ga.best.failed_folds > 0 {
                        report.warnings.push(format!(
                            "best chromosome had {} failed classifier folds scored as errors",
                            out.ga.best.failed_folds
                        ));
                    }
                    out.selection
                }
                Method::Nmfqr => {
                    let nmf_cfg = cfg.nmf_config();
                    let (out, sel) = timer.time("select", || -> Result<_> {
                        let out = nmfqr_run(&data.x, &nmf_cfg)?;
                        let sel = rank_features(&out, &nmf_cfg, top_k);
                        Ok((out, sel))
                    })?;
                    report.nmf = Some(NmfSummary {
                        rank_k: out.rank_k,
                        bandwidth: out.bandwidth,
                        data_scale: out.data_scale,
                        iterations: out.diagnostics.len(),
                        objective_trace: out.state.objective_trace,
                    });
                    sel
                }
                Method::Rrqr => timer.time("select", || select(&cfg, data, top_k))?,
            };
            report.warnings.extend(sel.warnings.iter().cloned());
            report.selected_names = Some(sel.selected.iter().map(|&i| loaded.feature_names[i].clone()).collect());

            if cfg.folds > 0 {
                let ev = timer.time("evaluate", || -> Result<_> {
                    let folds = dobscv_folds(data, cfg.folds, cfg.seed)?;
                    Ok(cross_validate(data, Features::Fixed(&sel.selected), &classifier, &folds, positive)?)
                })?;
                if cfg.method == Method::QrGa {
                    report.warnings.push(
                        "evaluation reuses the samples the GA optimized on and is optimistic; \
                         `evaluate --method qr-ga` reselects inside each fold"
                            .into(),
                    );
                }
                report.undefined_metrics = undefined(&ev);
                report.evaluation = Some(ev);
            }
            report.selection = Some(sel);
        }

        Command::Evaluate => {
            let ev = timer.time("evaluate", || -> Result<_> {
                let folds = dobscv_folds(data, cfg.folds, cfg.seed)?;
                Ok(match &cfg.features {
                    Some(cols) => {
                        if cols.is_empty() || cols.iter().any(|&c| c >= n) {
                            return Err(CliError::Usage(format!(
                                "features must be nonempty indices below {n}"
                            )));
                        }
                        cross_validate(data, Features::Fixed(cols), &classifier, &folds, positive)?
                    }
                    None => {
                        let selector = |train: &LabeledDataset| -> qrsel::Result<Vec<usize>> {
                            select(&cfg, train, top_k)
                                .map(|s| s.selected)
                                .map_err(|e| match e {
                                    CliError::Algorithm(inner) => inner,
                                    other => qrsel::Error::InvalidInput(other.to_string()),
                                })
                        };
                        cross_validate(data, Features::Selector(&selector), &classifier, &folds, positive)?
                    }
                })
            })?;
            report.undefined_metrics = undefined(&ev);
            report.evaluation = Some(ev);
        }

        Command::FSweep => {
            let grid = cfg.f_grid();
            let rows = timer.time("f_sweep", || -> Result<Vec<SweepRow>> {
                let folds = dobscv_folds(data, cfg.folds, cfg.seed)?;
                let rows: Vec<qrsel::Result<SweepRow>> = grid
                    .par_iter()
                    .map(|&f| {
                        let sel = select_features_rrqr(&data.x, top_k, f)?;
                        let ev = cross_validate(data, Features::Fixed(&sel.selected), &classifier, &folds, positive)?;
                        Ok(SweepRow {
                            f,
                            swaps: sel.params["swaps"] as usize,
                            certificate: sel.params["certificate"],
                            selected: sel.selected,
                            mean_fold_error: ev.mean_fold_error(),
                            pooled: ev.pooled,
                        })
                    })
                    .collect();
                Ok(rows.into_iter().collect::<qrsel::Result<Vec<_>>>()?)
            })?;
            report.f_sweep = Some(rows);
        }

        Command::Factorize => {
            let fact = timer.time("factorize", || -> Result<_> {
                let rank = numerical_rank(&data.x);
                if rank == 0 {
                    return Err(CliError::Data("feature matrix is numerically zero".into()));
                }
                let k = top_k.min(rank);
                let fact = strong_rrqr(&data.x, &RrqrConfig::new(k, cfg.f))?;
                Ok((rank, fact))
            })?;
            let (rank, fact) = fact;
            if fact.k < top_k {
                report.warnings.push(format!(
                    "requested k = {top_k} but numerical rank is {rank}; factorized with k = {}",
                    fact.k
                ));
            }
            report.factorization = Some(FactorizationSummary {
                k: fact.k,
                f: fact.f,
                numerical_rank: rank,
                r11_diagonal: (0..fact.k).map(|i| fact.r[(i, i)]).collect(),
                perm: fact.perm,
                certificate: fact.certificate,
                swaps_performed: fact.swaps_performed,
                log_det_history: fact.log_det_history,
            });
        }
    }

    if cfg.folds == 1 && (report.evaluation.is_some() || report.f_sweep.is_some()) {
        report
            .warnings
            .push("folds = 1 trains and tests on every sample (resubstitution); accuracy is optimistic".into());
    }
    for m in &report.undefined_metrics {
        report.warnings.push(format!("pooled {m} is undefined (zero denominator)"));
    }
    report.timing = timer.finish();
    Ok(report)
}
