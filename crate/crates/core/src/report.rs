//! Machine-readable experiment reports: `report.json` plus one CSV per
//! series.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// A table whose first column is usually time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// A path that aborted, kept in the report instead of being dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config_echo: serde_json::Value,
    pub per_time_series: Vec<Series>,
    pub pass_flags: BTreeMap<String, bool>,
    pub seeds: Vec<u64>,
    /// Scalar results (ratios, slopes, fitted rates).
    pub summary: BTreeMap<String, serde_json::Value>,
    pub failures: Vec<PathFailure>,
}

impl Report {
    pub fn new(experiment: &str, config_echo: serde_json::Value, seeds: Vec<u64>) -> Self {
        Self {
            experiment: experiment.into(),
            config_echo,
            per_time_series: Vec::new(),
            pass_flags: BTreeMap::new(),
            seeds,
            summary: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: bool) {
        self.pass_flags.insert(name.into(), value);
    }

    pub fn note(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.summary.insert(name.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.pass_flags.values().all(|&v| v)
    }

    pub fn aborted(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json` and `<series>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        for s in &self.per_time_series {
            let f = fs::File::create(dir.join(format!("{}.csv", s.name)))?;
            s.write_csv(std::io::BufWriter::new(f))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_keys_and_csv() {
        let mut r = Report::new("simulate", serde_json::json!({"b": 1, "a": 2}), vec![3, 4]);
        let mut s = Series::new("energy", &["t", "e"]);
        s.push(vec![0.0, 0.5]);
        s.push(vec![0.1, 0.25]);
        r.per_time_series.push(s);
        r.flag("ok", true);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["experiment", "config_echo", "per_time_series", "pass_flags", "seeds"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(r.passed());
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
        assert_eq!(csv, "t,e\n0,0.5\n0.1,0.25\n");
    }
}
