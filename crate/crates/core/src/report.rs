//! Experiment reports and their deterministic serialization.

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("metric {0:?} is not finite; refusing to serialize")]
    NonFiniteMetric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Companion CSV table of an experiment.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvTable {
    pub fn new(header: impl Into<String>) -> Self {
        Self { header: header.into(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }

}

impl std::fmt::Display for CsvTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.header)?;
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// Outcome of one experiment run. `pass` is determined solely by thresholds
/// declared in the config; metrics are keyed in a sorted map so serialization
/// is byte-stable. Wall-clock time is kept out of the serialized form so
/// reruns with the same config and seed are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    pub seed: u64,
    #[serde(skip)]
    pub runtime_seconds: f64,
    #[serde(skip)]
    pub table: Option<CsvTable>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, config: serde_json::Value, seed: u64) -> Self {
        Self {
            name: name.into(),
            config,
            metrics: BTreeMap::new(),
            pass: false,
            seed,
            runtime_seconds: 0.0,
            table: None,
        }
    }

    pub fn set_metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    /// Pretty JSON (sorted keys, newline-terminated).
    pub fn to_json_string(&self) -> Result<String, ReportError> {
        for (k, v) in &self.metrics {
            if !v.is_finite() {
                return Err(ReportError::NonFiniteMetric(k.clone()));
            }
        }
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        Ok(s)
    }
}

fn sanitize_filename(name: &str) -> String {
    name.chars()
        .map(|c| if c == '/' || c == '\\' || c.is_whitespace() { '-' } else { c })
        .collect()
}

/// Write `<name>-<seed>.json` and, when a table is attached,
/// `<name>-<seed>.csv`. Returns the created paths.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let json = report.to_json_string()?;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", sanitize_filename(&report.name), report.seed);
    let mut paths = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    let mut f = std::fs::File::create(&json_path)?;
    f.write_all(json.as_bytes())?;
    paths.push(json_path);
    if let Some(table) = &report.table {
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut f = std::fs::File::create(&csv_path)?;
        f.write_all(table.to_string().as_bytes())?;
        paths.push(csv_path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let mut r = ExperimentReport::new(
            "démo-variance",
            serde_json::json!({"hurst": 1.5, "n": 100}),
            7,
        );
        r.set_metric("slope", 3.0);
        r.set_metric("alpha", 0.8);
        r.pass = true;
        r.runtime_seconds = 1.25;
        let mut t = CsvTable::new("a,b");
        t.push("1,2".into());
        r.table = Some(t);
        r
    }

    #[test]
    fn serialization_is_byte_stable_and_excludes_runtime() {
        let mut a = sample_report();
        let mut b = sample_report();
        a.runtime_seconds = 0.5;
        b.runtime_seconds = 99.0;
        let ja = a.to_json_string().unwrap();
        let jb = b.to_json_string().unwrap();
        assert_eq!(ja, jb, "wall-clock must not leak into the artifact");
        assert!(ja.ends_with('\n'));
        // sorted metric keys
        assert!(ja.find("\"alpha\"").unwrap() < ja.find("\"slope\"").unwrap());
    }

    #[test]
    fn nan_metric_rejected() {
        let mut r = sample_report();
        r.set_metric("bad", f64::NAN);
        assert!(matches!(r.to_json_string(), Err(ReportError::NonFiniteMetric(_))));
    }

    #[test]
    fn write_round_trip_unicode_names() {
        let dir = std::env::temp_dir().join(format!("fraclab-report-{}", std::process::id()));
        let report = sample_report();
        let paths = write_report(&report, &dir).unwrap();
        assert_eq!(paths.len(), 2);
        let body = std::fs::read_to_string(&paths[0]).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(parsed["name"], "démo-variance");
        let again = write_report(&report, &dir).unwrap();
        assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&again[0]).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
