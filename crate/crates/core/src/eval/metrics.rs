use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-vs-rest confusion counts for a single positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }
}

/// Evaluation metrics; `None` marks a 0/0 denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specificity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
}

impl MetricVector {
    pub const NAMES: [&'static str; 7] = [
        "accuracy",
        "sensitivity",
        "specificity",
        "g_mean",
        "precision",
        "recall",
        "f1",
    ];

    pub fn values(&self) -> [Option<f64>; 7] {
        [
            self.accuracy,
            self.sensitivity,
            self.specificity,
            self.g_mean,
            self.precision,
            self.recall,
            self.f1,
        ]
    }

    pub fn from_values(v: [Option<f64>; 7]) -> Self {
        Self {
            accuracy: v[0],
            sensitivity: v[1],
            specificity: v[2],
            g_mean: v[3],
            precision: v[4],
            recall: v[5],
            f1: v[6],
        }
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> {
        Self::NAMES.into_iter().zip(self.values())
    }

    /// Names of metrics whose denominators vanished.
    pub fn undefined(&self) -> Vec<&'static str> {
        self.named().filter(|(_, v)| v.is_none()).map(|(n, _)| n).collect()
    }
}

/// Counts against `positive_class`; every other label is negative.
pub fn confusion(pred: &[usize], truth: &[usize], positive_class: usize) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == positive_class, t == positive_class) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> MetricVector {
    let accuracy = ratio(c.tp + c.tn, c.total());
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = sensitivity;
    let g_mean = match (sensitivity, specificity) {
        (Some(a), Some(b)) => Some((a * b).sqrt()),
        _ => None,
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    MetricVector {
        accuracy,
        sensitivity,
        specificity,
        g_mean,
        precision,
        recall,
        f1,
    }
}

/// Multiclass summary: overall accuracy plus one-vs-rest metrics averaged
/// over the classes where each is defined.
pub fn macro_metrics(pred: &[usize], truth: &[usize], class_count: usize) -> Result<MetricVector> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut sums = [0.0; 7];
    let mut counts = [0usize; 7];
    for c in 0..class_count {
        let m = metrics(&confusion(pred, truth, c)?);
        for (t, v) in m.values().into_iter().enumerate() {
            if let Some(v) = v {
                sums[t] += v;
                counts[t] += 1;
            }
        }
    }
    let mut out = [None; 7];
    for t in 0..7 {
        out[t] = (counts[t] > 0).then(|| sums[t] / counts[t] as f64);
    }
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    out[0] = ratio(correct, pred.len());
    Ok(MetricVector::from_values(out))
}
