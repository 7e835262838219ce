//! JSON reports and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Outcome class of a run; `Negative` maps to exit status 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Negative,
}

/// Run-dependent data kept apart from the reproducible part of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub tool_version: &'static str,
    pub unix_time: u64,
    pub threads: usize,
}

impl Metadata {
    pub fn now(threads: usize) -> Self {
        let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { tool_version: env!("CARGO_PKG_VERSION"), unix_time, threads }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub verdict: Verdict,
    pub summary: String,
    pub results: Vec<Value>,
    pub metadata: Metadata,
}

/// Headered CSV table written next to the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, headers: &[&str]) -> Self {
        Self { file: file.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| format!("{x:?}")).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Writes `report.json` and every table into `out_dir`, creating it if needed.
pub fn emit_report(report: &Report, tables: &[Table], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::new();
    let path = out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report).context("serializing report")?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    for t in tables {
        let path = out_dir.join(&t.file);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&t.headers).with_context(|| format!("writing {}", path.display()))?;
        for row in &t.rows {
            w.write_record(row).with_context(|| format!("writing {}", path.display()))?;
        }
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
