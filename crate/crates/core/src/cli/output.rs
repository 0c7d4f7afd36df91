// SPDX-License-Identifier: Apache-2.0

//! CSV tables and the JSON manifest written next to them.
//!
//! Numbers use Rust's shortest round-trip formatting, so identical values
//! always print identically. Undefined values are empty cells.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::hex_digest;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&'static str]) -> Self {
        Table {
            file: file.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        w.into_inner().expect("in-memory csv")
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        // Debug switches to exponent form for very small or large values.
        format!("{x:?}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Elapsed wall-clock time per named step.
#[derive(Debug)]
pub struct Stopwatch {
    start: Instant,
    last: Instant,
    steps: Vec<Timing>,
}

impl Stopwatch {
    pub fn start() -> Self {
        let now = Instant::now();
        Stopwatch {
            start: now,
            last: now,
            steps: Vec::new(),
        }
    }

    pub fn lap(&mut self, step: &str) {
        let now = Instant::now();
        self.steps.push(Timing {
            step: step.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    pub fn total(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn into_steps(self) -> Vec<Timing> {
        self.steps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// File name relative to the manifest.
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub threads: usize,
    /// Set when the run reaches past half the bath's recurrence time.
    pub recurrence_warning: bool,
    pub outputs: Vec<OutputRecord>,
    pub timings: Vec<Timing>,
    pub total_seconds: f64,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| io_err(path, source))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: not a run manifest: {e}", path.display())))
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes every table into `dir`, returning one record per file.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<OutputRecord>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    tables
        .iter()
        .map(|t| {
            let bytes = t.to_bytes();
            let path: PathBuf = dir.join(&t.file);
            std::fs::write(&path, &bytes).map_err(|e| io_err(&path, e))?;
            Ok(OutputRecord {
                path: t.file.clone(),
                sha256: hex_digest(&bytes),
                rows: t.rows.len(),
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
