//! Versioned run report and its JSON / long-format CSV emitters.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qrsel::eval::{EvaluationReport, MetricVector};
use qrsel::ga::GenerationStats;
use qrsel::SelectionResult;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Command, Format, RunConfig};
use crate::data::DatasetInfo;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub f: f64,
    pub selected: Vec<usize>,
    pub swaps: usize,
    pub certificate: f64,
    pub pooled: MetricVector,
    pub mean_fold_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationSummary {
    pub k: usize,
    pub f: f64,
    pub numerical_rank: usize,
    pub perm: Vec<usize>,
    pub r11_diagonal: Vec<f64>,
    pub certificate: f64,
    pub swaps_performed: usize,
    pub log_det_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfSummary {
    pub rank_k: usize,
    pub bandwidth: f64,
    pub data_scale: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaSummary {
    pub filter_rank: usize,
    /// Candidate features kept by the RRQR filter, in original indices.
    pub filter_selected: Vec<usize>,
    pub best_fitness: f64,
    pub cv_error: f64,
    pub subset_size: usize,
    pub decoded_params: BTreeMap<String, f64>,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
    pub cache_hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationReport>,
    /// Pooled metrics the evaluation could not define (0/0).
    #[serde(default)]
    pub undefined_metrics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_sweep: Option<Vec<SweepRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorizationSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmf: Option<NmfSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaSummary>,
    /// Wall-clock seconds per phase.
    pub timing: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("report does not parse: {e}")))
    }

    /// Long-format table: `section,key,index,value`.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<[String; 4]> = Vec::new();
        let mut push = |section: &str, key: &str, index: Option<usize>, value: String| {
            rows.push([section.into(), key.into(), index.map(|i| i.to_string()).unwrap_or_default(), value]);
        };

        push("meta", "schema_version", None, self.schema_version.to_string());
        push("meta", "tool", None, self.tool.clone());
        push("meta", "version", None, self.version.clone());
        if let Value::Object(cfg) = serde_json::to_value(&self.config).expect("config serializes") {
            for (k, v) in cfg {
                match v {
                    Value::Null => {}
                    Value::String(s) => push("config", &k, None, s),
                    Value::Array(items) => {
                        for (i, item) in items.iter().enumerate() {
                            push("config", &k, Some(i), item.to_string());
                        }
                    }
                    other => push("config", &k, None, other.to_string()),
                }
            }
        }
        push("dataset", "samples", None, self.dataset.samples.to_string());
        push("dataset", "features", None, self.dataset.features.to_string());
        push("dataset", "label_column", None, self.dataset.label_column.clone());
        for (code, name) in self.dataset.classes.iter().enumerate() {
            push("class", name, Some(code), self.dataset.class_counts[code].to_string());
        }

        if let Some(sel) = &self.selection {
            push("selection", "method", None, sel.method.to_string());
            for (rank, (&idx, &score)) in sel.selected.iter().zip(&sel.scores).enumerate() {
                push("selection", "feature", Some(rank), idx.to_string());
                push("selection", "score", Some(rank), score.to_string());
            }
            for (k, v) in &sel.params {
                push("selection_param", k, None, v.to_string());
            }
        }
        if let Some(names) = &self.selected_names {
            for (rank, n) in names.iter().enumerate() {
                push("selection", "name", Some(rank), n.clone());
            }
        }
        if let Some(ev) = &self.evaluation {
            push("evaluation", "n_folds", None, ev.n_folds.to_string());
            push("evaluation", "positive_class", None, ev.positive_class.to_string());
            let c = &ev.pooled_confusion;
            for (k, v) in [("tp", c.tp), ("tn", c.tn), ("fp", c.fp), ("fn", c.fn_)] {
                push("confusion", k, None, v.to_string());
            }
            for (name, v) in ev.pooled.named() {
                if let Some(v) = v {
                    push("pooled", name, None, v.to_string());
                }
            }
            for (name, v) in ev.summary.mean.named() {
                if let Some(v) = v {
                    push("mean", name, None, v.to_string());
                }
            }
            for (name, v) in ev.summary.sd.named() {
                if let Some(v) = v {
                    push("sd", name, None, v.to_string());
                }
            }
            for fold in &ev.folds {
                for (name, v) in fold.metrics.named() {
                    if let Some(v) = v {
                        push("fold", name, Some(fold.fold), v.to_string());
                    }
                }
            }
        }
        for m in &self.undefined_metrics {
            push("undefined_metric", m, None, String::new());
        }
        if let Some(sweep) = &self.f_sweep {
            for (i, row) in sweep.iter().enumerate() {
                push("f_sweep", "f", Some(i), row.f.to_string());
                push("f_sweep", "swaps", Some(i), row.swaps.to_string());
                push("f_sweep", "certificate", Some(i), row.certificate.to_string());
                push("f_sweep", "mean_fold_error", Some(i), row.mean_fold_error.to_string());
                for (name, v) in row.pooled.named() {
                    if let Some(v) = v {
                        push("f_sweep", name, Some(i), v.to_string());
                    }
                }
                let sel: Vec<String> = row.selected.iter().map(|s| s.to_string()).collect();
                push("f_sweep", "selected", Some(i), sel.join(" "));
            }
        }
        if let Some(fa) = &self.factorization {
            push("factorization", "k", None, fa.k.to_string());
            push("factorization", "f", None, fa.f.to_string());
            push("factorization", "numerical_rank", None, fa.numerical_rank.to_string());
            push("factorization", "certificate", None, fa.certificate.to_string());
            push("factorization", "swaps_performed", None, fa.swaps_performed.to_string());
            for (i, p) in fa.perm.iter().enumerate() {
                push("factorization", "perm", Some(i), p.to_string());
            }
            for (i, d) in fa.r11_diagonal.iter().enumerate() {
                push("factorization", "r11_diagonal", Some(i), d.to_string());
            }
            for (i, d) in fa.log_det_history.iter().enumerate() {
                push("factorization", "log_det", Some(i), d.to_string());
            }
        }
        if let Some(nmf) = &self.nmf {
            push("nmf", "rank_k", None, nmf.rank_k.to_string());
            push("nmf", "bandwidth", None, nmf.bandwidth.to_string());
            push("nmf", "data_scale", None, nmf.data_scale.to_string());
            for (i, v) in nmf.objective_trace.iter().enumerate() {
                push("nmf", "objective", Some(i), v.to_string());
            }
        }
        if let Some(ga) = &self.ga {
            push("ga", "filter_rank", None, ga.filter_rank.to_string());
            push("ga", "best_fitness", None, ga.best_fitness.to_string());
            push("ga", "cv_error", None, ga.cv_error.to_string());
            push("ga", "subset_size", None, ga.subset_size.to_string());
            push("ga", "evaluations", None, ga.evaluations.to_string());
            push("ga", "cache_hits", None, ga.cache_hits.to_string());
            for (k, v) in &ga.decoded_params {
                push("ga_param", k, None, v.to_string());
            }
            for g in &ga.history {
                push("ga_history", "best", Some(g.generation), g.best.to_string());
                push("ga_history", "mean", Some(g.generation), g.mean.to_string());
            }
        }
        for (phase, secs) in &self.timing {
            push("timing", phase, None, secs.to_string());
        }
        for (i, w) in self.warnings.iter().enumerate() {
            push("warning", "", Some(i), w.clone());
        }

        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["section", "key", "index", "value"]).expect("in-memory write");
        for r in &rows {
            out.write_record(r).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Writes the report to `path`, or stdout when `path` is `None`.
pub fn emit_report(report: &Report, path: Option<&Path>, format: Format) -> Result<()> {
    let text = report.render(format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
