//! CSV ingestion: samples as rows, one label column, numeric features.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use qrsel::eval::LabeledDataset;
use qrsel::DenseMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A loaded dataset plus what the report needs to explain it.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub dataset: LabeledDataset,
    pub label_column: String,
    /// Original label values; the position is the class code.
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub samples: usize,
    pub features: usize,
    pub label_column: String,
    pub classes: Vec<String>,
    pub class_counts: Vec<usize>,
    pub feature_names: Vec<String>,
}

impl LoadedData {
    pub fn info(&self, path: &str) -> DatasetInfo {
        DatasetInfo {
            path: path.to_string(),
            samples: self.dataset.n_samples(),
            features: self.dataset.n_features(),
            label_column: self.label_column.clone(),
            classes: self.classes.clone(),
            class_counts: self.dataset.class_counts(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Class code of an original label value.
    pub fn class_code(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }
}

struct Grid {
    path: PathBuf,
    /// (file line, cells) per record, header included.
    records: Vec<(u64, Vec<String>)>,
}

fn read_grid(path: &Path) -> Result<Grid> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.len() < 2 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: records.first().map_or(1, |r| r.0),
            message: "need a header row and at least one data row".into(),
        });
    }
    Ok(Grid {
        path: path.to_path_buf(),
        records,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        },
    }
}

/// Name match first, then a zero-based index; `None` picks the last entry.
fn resolve_label(names: &[String], spec: Option<&str>) -> Option<usize> {
    match spec {
        None => names.len().checked_sub(1),
        Some(s) => names
            .iter()
            .position(|n| n == s)
            .or_else(|| s.parse::<usize>().ok().filter(|&i| i < names.len())),
    }
}

fn parse_cell(grid: &Grid, line: u64, row: usize, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| CliError::Parse {
        path: grid.path.clone(),
        line,
        message: format!("non-numeric value {cell:?} in column {column} (row {row})"),
    })?;
    if !v.is_finite() {
        return Err(CliError::NonFinite {
            path: grid.path.clone(),
            row,
            line,
            column: column.to_string(),
            value: cell.to_string(),
        });
    }
    Ok(v)
}

/// Dense codes for label strings: numeric order when every label parses as a
/// number, lexicographic otherwise.
pub fn code_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let distinct: BTreeSet<&String> = raw.iter().collect();
    let mut classes: Vec<String> = distinct.into_iter().cloned().collect();
    let numeric: Option<Vec<f64>> = classes.iter().map(|c| c.parse::<f64>().ok()).collect();
    if let Some(vals) = numeric {
        let mut pairs: Vec<(f64, String)> = vals.into_iter().zip(classes).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        classes = pairs.into_iter().map(|p| p.1).collect();
    }
    let code: BTreeMap<&String, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    (raw.iter().map(|r| code[r]).collect(), classes)
}

/// Reads `path` into a labeled dataset.
///
/// With `transpose` the file holds one feature per row: the first column
/// names the feature, the header names the samples, and the label row is
/// picked by `label` among the row names.
pub fn load_csv(path: &Path, label: Option<&str>, transpose: bool) -> Result<LoadedData> {
    let grid = read_grid(path)?;
    let (header_line, header) = &grid.records[0];
    let body = &grid.records[1..];

    let (x, raw_labels, label_column, feature_names) = if !transpose {
        let li = resolve_label(header, label).ok_or_else(|| {
            CliError::Data(format!(
                "{}: label column {:?} not found in header (line {header_line})",
                path.display(),
                label.unwrap_or("<last>")
            ))
        })?;
        let names: Vec<String> = header.iter().enumerate().filter(|&(c, _)| c != li).map(|(_, h)| h.clone()).collect();
        if names.is_empty() {
            return Err(CliError::Data(format!("{}: no feature columns", path.display())));
        }
        let mut x = DenseMatrix::zeros(body.len(), names.len());
        let mut labels = Vec::with_capacity(body.len());
        for (r, (line, cells)) in body.iter().enumerate() {
            let mut j = 0;
            for (c, cell) in cells.iter().enumerate() {
                if c == li {
                    labels.push(cell.clone());
                } else {
                    x[(r, j)] = parse_cell(&grid, *line, r + 1, &header[c], cell)?;
                    j += 1;
                }
            }
        }
        (x, labels, header[li].clone(), names)
    } else {
        let row_names: Vec<String> = body.iter().map(|(_, cells)| cells[0].clone()).collect();
        let li = resolve_label(&row_names, label).ok_or_else(|| {
            CliError::Data(format!(
                "{}: label row {:?} not found among row names",
                path.display(),
                label.unwrap_or("<last>")
            ))
        })?;
        let samples = header.len() - 1;
        let feature_rows: Vec<usize> = (0..body.len()).filter(|&r| r != li).collect();
        if samples == 0 || feature_rows.is_empty() {
            return Err(CliError::Data(format!("{}: no samples or no feature rows", path.display())));
        }
        let mut x = DenseMatrix::zeros(samples, feature_rows.len());
        for (j, &r) in feature_rows.iter().enumerate() {
            let (line, cells) = &body[r];
            for s in 0..samples {
                x[(s, j)] = parse_cell(&grid, *line, s + 1, &cells[0], &cells[s + 1])?;
            }
        }
        let labels = body[li].1[1..].to_vec();
        let names = feature_rows.iter().map(|&r| row_names[r].clone()).collect();
        (x, labels, row_names[li].clone(), names)
    };

    if let Some(pos) = raw_labels.iter().position(String::is_empty) {
        return Err(CliError::Data(format!(
            "{}: empty label at row {}",
            path.display(),
            pos + 1
        )));
    }
    let (y, classes) = code_labels(&raw_labels);
    let dataset = LabeledDataset::new(x, y)?.with_feature_names(feature_names.clone())?;
    Ok(LoadedData {
        dataset,
        label_column,
        classes,
        feature_names,
    })
}
