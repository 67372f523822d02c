//! Tabular results: one CSV per table plus a `.meta.json` sidecar carrying
//! per-row reference checks, reliability flags and wall times.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::harness::config::RunConfig;

/// A reference whose self-check reaches this fraction of the reported error
/// makes the row unreliable.
pub const UNRELIABLE_FRACTION: f64 = 0.01;

/// One row of an error table. Empty optional columns are left blank.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub epsilon: f64,
    pub gamma: f64,
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub err_psi_linf: Option<f64>,
    pub err_phi_linf: Option<f64>,
    pub err_total: Option<f64>,
    pub eta_nls_psi: Option<f64>,
    pub eta_nls_phi: Option<f64>,
    pub eta_op_psi: Option<f64>,
    pub eta_op_phi: Option<f64>,
    pub energy_rel_err: Option<f64>,
    /// Kept blank in the CSV so that reruns are byte-identical; the measured
    /// time lives in the sidecar.
    pub wall_time_s: Option<f64>,
}

/// Sidecar information about one row.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RowMeta {
    pub reference_self_check: Option<f64>,
    pub unreliable: bool,
    pub wall_time_s: f64,
}

impl RowMeta {
    /// Flags the row when the reference disagrees with itself by at least
    /// [`UNRELIABLE_FRACTION`] of the error it is used to measure.
    pub fn checked(self_check: f64, err: f64, wall_time_s: f64) -> Self {
        RowMeta {
            reference_self_check: Some(self_check),
            unreliable: self_check.partial_cmp(&(UNRELIABLE_FRACTION * err)) != Some(Ordering::Less),
            wall_time_s,
        }
    }

    pub fn timed(wall_time_s: f64) -> Self {
        RowMeta {
            wall_time_s,
            ..Default::default()
        }
    }
}

/// An error table with one sidecar entry per row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub rows: Vec<(ErrorRecord, RowMeta)>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Table {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Orders rows by `(epsilon, tau, N, T)`, independent of completion order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|(a, _), (b, _)| {
            a.epsilon
                .total_cmp(&b.epsilon)
                .then(a.tau.total_cmp(&b.tau))
                .then(a.n.cmp(&b.n))
                .then(a.t.total_cmp(&b.t))
                .then(Ordering::Equal)
        });
    }

    pub fn records(&self) -> impl Iterator<Item = &ErrorRecord> {
        self.rows.iter().map(|(r, _)| r)
    }

    pub fn any_unreliable(&self) -> bool {
        self.rows.iter().any(|(_, m)| m.unreliable)
    }
}

/// Free-form CSV: a header and rows of numbers (profiles, probes, coefficient dumps).
#[derive(Debug, Clone, Default)]
pub struct DataFile {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl DataFile {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        DataFile {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub files: Vec<DataFile>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: String,
    table: &'a str,
    config: &'a RunConfig,
    columns: &'static [&'static str],
    rows: Vec<SidecarRow<'a>>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct SidecarRow<'a> {
    epsilon: f64,
    tau: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: f64,
    #[serde(flatten)]
    meta: &'a RowMeta,
}

pub const ERROR_COLUMNS: &[&str] = &[
    "epsilon",
    "gamma",
    "tau",
    "N",
    "T",
    "err_psi_linf",
    "err_phi_linf",
    "err_total",
    "eta_nls_psi",
    "eta_nls_phi",
    "eta_op_psi",
    "eta_op_phi",
    "energy_rel_err",
    "wall_time_s",
];

/// Writes `<name>.csv` for every table and data file, plus
/// `<name>.meta.json` for every table. Returns the paths written.
pub fn write_output(out: &ExperimentOutput, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for table in &out.tables {
        let path = dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path)?;
        if table.rows.is_empty() {
            w.write_record(ERROR_COLUMNS)?;
        }
        for (rec, _) in &table.rows {
            w.serialize(rec)?;
        }
        w.flush()?;
        written.push(path);

        let sidecar = Sidecar {
            experiment: cfg.experiment.to_string(),
            table: &table.name,
            config: cfg,
            columns: ERROR_COLUMNS,
            rows: table
                .rows
                .iter()
                .map(|(r, m)| SidecarRow {
                    epsilon: r.epsilon,
                    tau: r.tau,
                    n: r.n,
                    t: r.t,
                    meta: m,
                })
                .collect(),
            notes: &table.notes,
        };
        let meta_path = dir.join(format!("{}.meta.json", table.name));
        fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
        written.push(meta_path);
    }
    for file in &out.files {
        let path = dir.join(format!("{}.csv", file.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&file.header)?;
        for row in &file.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Experiment;

    fn rec(eps: f64, tau: f64, t: f64) -> ErrorRecord {
        ErrorRecord {
            epsilon: eps,
            gamma: 2.0 * eps,
            tau,
            n: 64,
            t,
            err_total: Some(1.0),
            ..Default::default()
        }
    }

    #[test]
    fn rows_sort_by_key() {
        let mut t = Table::new("x");
        for (e, tau, tt) in [(0.5, 0.1, 1.0), (0.25, 0.2, 1.0), (0.25, 0.1, 0.5), (0.25, 0.1, 0.2)] {
            t.rows.push((rec(e, tau, tt), RowMeta::timed(0.0)));
        }
        t.sort();
        let keys: Vec<_> = t.records().map(|r| (r.epsilon, r.tau, r.t)).collect();
        assert_eq!(keys, vec![(0.25, 0.1, 0.2), (0.25, 0.1, 0.5), (0.25, 0.2, 1.0), (0.5, 0.1, 1.0)]);
    }

    #[test]
    fn unreliable_flag() {
        assert!(!RowMeta::checked(1e-9, 1e-6, 0.0).unreliable);
        assert!(RowMeta::checked(1e-7, 1e-6, 0.0).unreliable);
        assert!(RowMeta::checked(f64::NAN, 1e-6, 0.0).unreliable);
    }

    #[test]
    fn csv_header_and_blank_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo");
        t.rows.push((rec(0.5, 0.1, 1.0), RowMeta::checked(0.0, 1.0, 0.25)));
        let out = ExperimentOutput {
            tables: vec![t],
            files: vec![],
        };
        let cfg = RunConfig::defaults(Experiment::AccuracyTime);
        let paths = write_output(&out, &cfg, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("demo.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), ERROR_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "0.5,1.0,0.1,64,1.0,,,1.0,,,,,,");
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("demo.meta.json")).unwrap()).unwrap();
        assert_eq!(meta["rows"][0]["wall_time_s"], 0.25);
        assert_eq!(meta["rows"][0]["unreliable"], false);
    }
}
