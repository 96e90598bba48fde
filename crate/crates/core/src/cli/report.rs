use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::scenario::Format;
use crate::error::{Error, Result};
use crate::finite_prob::{format_rational, ProcessTable, Rational};

pub const REPORT_SCHEMA: &str = "enlargement-report/1";

/// A plot- or spreadsheet-ready table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub label: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
    pub tables: Vec<Table>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub mode: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(scenario: &str, mode: &str, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { schema: REPORT_SCHEMA.into(), scenario: scenario.into(), mode: mode.into(), passed, checks }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(s).map_err(|e| Error::Scenario(format!("report: {e}")))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Scenario(format!("unsupported report schema `{}`", report.schema)));
        }
        Ok(report)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} ({} mode): {}\n", self.scenario, self.mode, verdict(self.passed));
        for c in &self.checks {
            out.push_str(&format!("  {} {} [{}]: {}\n", verdict(c.passed), c.check, c.label, c.summary));
        }
        out
    }

    /// Writes the requested artifacts into `dir`; returns the written paths.
    pub fn write_artifacts(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut formats = formats.to_vec();
        formats.sort();
        formats.dedup();
        for format in formats {
            match format {
                Format::Json => written.push(write_atomic(&dir.join(format!("{}.json", self.scenario)), &self.to_json())?),
                Format::Text => written.push(write_atomic(&dir.join(format!("{}.txt", self.scenario)), &self.to_text())?),
                Format::Csv => {
                    for c in &self.checks {
                        for t in &c.tables {
                            let name = format!("{}-{}-{}.csv", self.scenario, c.check, t.name);
                            written.push(write_atomic(&dir.join(name), &t.to_csv())?);
                        }
                    }
                }
            }
        }
        Ok(written)
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(path.to_path_buf())
}

pub fn rational_json(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

/// Columns of rationals as strings.
pub fn process_json(x: &ProcessTable) -> Value {
    Value::Array((0..x.columns()).map(|k| Value::Array(x.column(k).iter().map(rational_json).collect())).collect())
}
