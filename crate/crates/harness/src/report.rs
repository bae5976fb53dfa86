//! Run reports: tables, bands, checks, and their JSON/CSV forms.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this configuration, e.g. an inequality needing `q < p`.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Observed `[min, max]` of a ratio over a corpus. Bands are measurements,
/// not known constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub empirical: bool,
}

impl Band {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut b = Band {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
            empirical: true,
        };
        for v in values {
            b.min = b.min.min(v);
            b.max = b.max.max(v);
            b.count += 1;
        }
        (b.count > 0).then_some(b)
    }

    pub fn width(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub bands: BTreeMap<String, Band>,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// The same measurement on the refined configuration, when requested.
    pub refinement: Option<Box<Report>>,
    pub wall_clock_s: f64,
}

impl Report {
    pub fn new(suite: &str, config: &ExperimentConfig) -> Self {
        Self {
            suite: suite.into(),
            config: config.clone(),
            tables: Vec::new(),
            bands: BTreeMap::new(),
            values: BTreeMap::new(),
            checks: Vec::new(),
            refinement: None,
            wall_clock_s: 0.0,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>, tolerance: Option<f64>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            tolerance,
        });
        passed
    }

    pub fn skip(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            status: Status::Skipped,
            detail: detail.into(),
            tolerance: None,
        });
    }

    pub fn band(&mut self, name: &str, values: impl IntoIterator<Item = f64>) -> Option<Band> {
        let b = Band::of(values)?;
        self.bands.insert(name.into(), b);
        Some(b)
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.values.insert(name.into(), v);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// No check failed, here or in the refinement.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail) && self.refinement.as_ref().is_none_or(|r| r.passed())
    }

    pub fn failures(&self) -> Vec<&Check> {
        let mut out: Vec<&Check> = self.checks.iter().filter(|c| c.status == Status::Fail).collect();
        if let Some(r) = &self.refinement {
            out.extend(r.failures());
        }
        out
    }

    /// `report.json` plus one CSV per table; refinement tables get a `refined_` prefix.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        self.write_tables(dir, "")
    }

    fn write_tables(&self, dir: &Path, prefix: &str) -> Result<()> {
        for t in &self.tables {
            t.write_csv(&dir.join(format!("{prefix}{}.csv", t.name)))?;
        }
        if let Some(r) = &self.refinement {
            r.write_tables(dir, &format!("{prefix}refined_"))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        if let Some(r) = &self.refinement {
            for line in r.summary().lines() {
                s.push_str(&format!("  refined {line}\n"));
            }
        }
        s
    }
}
