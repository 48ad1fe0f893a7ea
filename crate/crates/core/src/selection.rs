use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rrqr,
    Nmfqr,
    QrGa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rrqr => "rrqr",
            Method::Nmfqr => "nmfqr",
            Method::QrGa => "qr-ga",
        })
    }
}

/// Ranked feature indices produced by one of the selectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Feature (column) indices into the input matrix, best first.
    pub selected: Vec<usize>,
    /// One score per selected feature; meaning depends on `method`.
    pub scores: Vec<f64>,
    pub method: Method,
    /// Echo of the numeric configuration that produced the selection.
    pub params: BTreeMap<String, f64>,
    /// Set when fewer features than requested were returned because the
    /// requested count exceeded the numerical rank.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}
