//! Flat report rows shared by every check, and CSV/JSON writers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One verified inequality: `statistic` is compared against `bound`.
///
/// `margin` is the signed slack, positive on the passing side. This is the
/// JSON object emitted for every map check and the row format of the lemma
/// reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub delta: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub statistic: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl CheckRow {
    /// A check of `statistic ≤ bound`.
    pub fn new(check: impl Into<String>, statistic: f64, bound: f64, pass: bool) -> Self {
        CheckRow {
            check: check.into(),
            delta: None,
            n: None,
            seed: None,
            statistic,
            bound,
            margin: bound - statistic,
            pass,
        }
    }

    /// A check of `statistic ≥ bound`.
    pub fn lower(check: impl Into<String>, statistic: f64, bound: f64, pass: bool) -> Self {
        CheckRow { margin: statistic - bound, ..Self::new(check, statistic, bound, pass) }
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Write serializable rows as CSV with a header derived from field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Render rows as CSV text (used when the header must exist even with no rows).
pub fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_json_fields() {
        let row = CheckRow::new("curvature", 0.1, 25.0 / 27.0, true).delta(0.125).seed(3);
        let v: serde_json::Value = serde_json::to_value(&row).unwrap();
        for key in ["check", "delta", "n", "seed", "statistic", "bound", "pass"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["n"].is_null());
    }

    #[test]
    fn csv_header_without_rows() {
        let s = csv_string::<CheckRow>(&["a", "b"], &[]).unwrap();
        assert_eq!(s, "a,b\n");
    }
}
