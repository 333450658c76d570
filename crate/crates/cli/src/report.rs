//! Check records, campaign reports and their JSON/CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use schatten_frames::constructions::GrowthSeries;
use serde::{Deserialize, Serialize};

use crate::config::{CampaignConfig, Command};
use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail check with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub tag: String,
    pub p: Option<f64>,
    pub passed: bool,
    pub tolerance: f64,
    pub measured: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(tag: &str, p: Option<f64>, tolerance: f64) -> Self {
        CheckRecord {
            tag: tag.to_string(),
            p,
            passed: false,
            tolerance,
            measured: BTreeMap::new(),
            note: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    pub fn count(self, key: &str, value: usize) -> Self {
        self.with(key, value as f64)
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        let passed = records.iter().filter(|r| r.passed).count();
        Summary {
            total: records.len(),
            passed,
            failed: records.len() - passed,
            all_passed: passed == records.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub command: Command,
    pub config: CampaignConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub wall_time_seconds: f64,
}

impl CampaignReport {
    pub fn new(config: &CampaignConfig, records: Vec<CheckRecord>, wall_time_seconds: f64) -> Self {
        CampaignReport {
            schema_version: SCHEMA_VERSION,
            command: config.command,
            config: config.clone(),
            summary: Summary::of(&records),
            records,
            wall_time_seconds,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.all_passed
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// A CSV file: `<name>.csv` in the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// `N, partial_sum, increment_ratio`.
    pub fn growth(name: impl Into<String>, series: &GrowthSeries) -> Self {
        let mut t = Table::new(name, &["N", "partial_sum", "increment_ratio"]);
        for row in series.rows() {
            t.push(vec![
                row.n.to_string(),
                row.partial_sum.to_string(),
                row.increment_ratio.map(|r| r.to_string()).unwrap_or_default(),
            ]);
        }
        t
    }

    /// All records with one tag, one row each, measured values as columns.
    pub fn of_records(tag: &str, records: &[CheckRecord]) -> Self {
        let rows: Vec<&CheckRecord> = records.iter().filter(|r| r.tag == tag).collect();
        let keys: BTreeSet<&str> = rows
            .iter()
            .flat_map(|r| r.measured.keys().map(String::as_str))
            .collect();
        let mut headers = vec!["p", "passed", "tolerance"];
        headers.extend(keys.iter().copied());
        headers.push("note");
        let mut t = Table::new(format!("checks_{tag}"), &headers);
        for r in rows {
            let mut row = vec![
                r.p.map(|p| p.to_string()).unwrap_or_default(),
                r.passed.to_string(),
                r.tolerance.to_string(),
            ];
            row.extend(
                keys.iter()
                    .map(|k| r.measured.get(*k).map(|v| v.to_string()).unwrap_or_default()),
            );
            row.push(r.note.clone().unwrap_or_default());
            t.push(row);
        }
        t
    }
}

/// A finished campaign: the report plus the tables written next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub report: CampaignReport,
    pub tables: Vec<Table>,
}

impl CampaignOutput {
    /// Campaign tables followed by one `checks_<tag>.csv` per record tag.
    pub fn all_tables(&self) -> Vec<Table> {
        let mut tags: Vec<&str> = Vec::new();
        for r in &self.report.records {
            if !tags.contains(&r.tag.as_str()) {
                tags.push(&r.tag);
            }
        }
        let mut tables = self.tables.clone();
        tables.extend(tags.iter().map(|tag| Table::of_records(tag, &self.report.records)));
        tables
    }

    /// Writes `report.json` and every CSV into `dir`, returning the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let report = dir.join("report.json");
        fs::write(&report, self.report.to_json() + "\n").map_err(|e| LabError::io(&report, e))?;
        let mut written = vec![report];
        for table in self.all_tables() {
            let path = dir.join(format!("{}.csv", table.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush().map_err(|e| LabError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
