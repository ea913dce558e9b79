//! Experiment reports: parameters, tabular series, fits and checks, written
//! as one JSON document plus one CSV per series.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::rng::GENERATOR_ID;
use crate::stats::Interval;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub value: f64,
    pub ci: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// Human-readable acceptance rule.
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub generator: String,
    pub seed: u64,
    pub parameters: Value,
    pub series: Vec<Series>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    pub fn new<P: Serialize>(experiment: &str, seed: u64, parameters: &P) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            generator: GENERATOR_ID.to_string(),
            seed,
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            series: vec![],
            fits: vec![],
            checks: vec![],
            wall_clock_s: 0.0,
        }
    }

    pub fn fit(&mut self, name: &str, value: f64, ci: Option<Interval>) {
        self.fits.push(Fit {
            name: name.to_string(),
            value,
            ci,
        });
    }

    pub fn check(&mut self, name: &str, pass: bool, value: f64, rule: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            value,
            rule: rule.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn get_fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.wall_clock_s = started.elapsed().as_secs_f64();
        self
    }

    /// Writes `<experiment>.json` and `<experiment>-<series>.csv`; returns
    /// the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = vec![];
        let json = dir.join(format!("{}.json", self.experiment));
        fs::write(&json, serde_json::to_string_pretty(self)?)?;
        out.push(json);
        for s in &self.series {
            let p = dir.join(format!("{}-{}.csv", self.experiment, s.name));
            fs::write(&p, s.to_csv()?)?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Shorthand for building rows.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(serde_json::json!($x)),*] };
}
