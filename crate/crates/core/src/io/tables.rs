use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::studies::StudyResult;

/// Column-named rows of reals, written as CSV with `{:.16e}` formatting
/// (17 significant digits, round-trips exactly).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_real(*v)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per diagnostics sample: `t, mass, T, V, E, H^s…, sup_potential`.
pub fn diagnostics_table(traj: &Trajectory, sobolev: &[f64]) -> Table {
    let mut cols: Vec<String> = ["t", "mass", "T", "V", "E"].map(String::from).to_vec();
    cols.extend(sobolev.iter().map(|s| format!("H^{s}")));
    cols.push("sup_potential".into());
    let mut table = Table::new(cols);
    for d in &traj.diagnostics {
        let mut row = vec![d.t, d.mass, d.kinetic, d.potential, d.energy];
        row.extend(d.sobolev.iter().copied());
        row.push(d.sup_potential);
        table.push(row);
    }
    table
}

/// Writes `<kind>.csv`, `<kind>_samples.csv` when per-sample data exist, and
/// `<kind>_summary.json`. Returns the written paths.
pub fn emit_tables(result: &StudyResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = result.kind.name();
    let mut written = Vec::new();
    let points = dir.join(format!("{stem}.csv"));
    result.points.write_csv(&points)?;
    written.push(points);
    if let Some(samples) = &result.samples {
        let path = dir.join(format!("{stem}_samples.csv"));
        samples.write_csv(&path)?;
        written.push(path);
    }
    let summary = dir.join(format!("{stem}_summary.json"));
    write_json(&result.summary(), &summary)?;
    written.push(summary);
    Ok(written)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
