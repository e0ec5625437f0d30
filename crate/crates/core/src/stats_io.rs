//! Plain-text outputs: efficiency series, μ_max tables, pair distributions
//! and the JSON run manifest that lists every output with its SHA-256.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values. Lines end in `\n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IoError;
use crate::exact::{MuMaxResult, PairDistribution};
use crate::series::EfficiencySeries;

pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Shortest representation that parses back to the same `f64`, in
/// exponent form outside `[1e−5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), IoError> {
    fs::write(path, content).map_err(|e| IoError::io(path, e))
}

pub fn series_csv(series: &EfficiencySeries) -> String {
    let mut out = String::new();
    match &series.se {
        Some(se) => {
            out.push_str("tau,mu,se\n");
            for ((t, m), s) in series.taus.iter().zip(&series.mu).zip(se) {
                let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*m), fmt_f64(*s));
            }
        }
        None => {
            out.push_str("tau,mu\n");
            for (t, m) in series.taus.iter().zip(&series.mu) {
                let _ = writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*m));
            }
        }
    }
    out
}

/// Header `tau,mu[,se]`, one row per sample.
pub fn write_series_csv(series: &EfficiencySeries, path: &Path) -> Result<(), IoError> {
    write_file(path, &series_csv(series))
}

/// Columns of a series file as written by [`write_series_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesColumns {
    pub taus: Vec<f64>,
    pub mu: Vec<f64>,
    pub se: Option<Vec<f64>>,
}

pub fn read_series_csv(path: &Path) -> Result<SeriesColumns, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let parse_err = |reason: String| IoError::Parse { path: path.to_path_buf(), reason };
    let mut lines = text.lines();
    let has_se = match lines.next() {
        Some("tau,mu") => false,
        Some("tau,mu,se") => true,
        other => return Err(parse_err(format!("unexpected header {other:?}"))),
    };
    let mut cols = SeriesColumns { taus: vec![], mu: vec![], se: has_se.then(Vec::new) };
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != if has_se { 3 } else { 2 } {
            return Err(parse_err(format!("row {} has {} fields", i + 1, fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(format!("row {}: {e}", i + 1)));
        cols.taus.push(num(fields[0])?);
        cols.mu.push(num(fields[1])?);
        if let Some(se) = cols.se.as_mut() {
            se.push(num(fields[2])?);
        }
    }
    Ok(cols)
}

fn check_table(results: &[MuMaxResult], path: &Path) -> Result<(), IoError> {
    if results.is_empty() {
        return Err(IoError::EmptyTable(path.to_path_buf()));
    }
    if results.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(IoError::Unsorted { path: path.to_path_buf() });
    }
    Ok(())
}

pub fn mumax_table(results: &[MuMaxResult], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("n,mu_max,tau_star,converged\n");
            for r in results {
                let _ = writeln!(out, "{},{},{},{}", r.n, fmt_f64(r.mu_max), fmt_f64(r.tau_star), r.converged);
            }
        }
        TableFormat::Markdown => {
            let row = |label: &str, cells: Vec<String>| format!("| {label} | {} |\n", cells.join(" | "));
            out.push_str(&row("n", results.iter().map(|r| r.n.to_string()).collect()));
            out.push_str(&row("---", results.iter().map(|_| "---".to_string()).collect()));
            out.push_str(&row("μ_max", results.iter().map(|r| format!("{:.4}", r.mu_max)).collect()));
            out.push_str(&row("τ*", results.iter().map(|r| format!("{:.4}", r.tau_star)).collect()));
            out.push_str(&row(
                "converged",
                results.iter().map(|r| if r.converged { "yes" } else { "no" }.to_string()).collect(),
            ));
        }
    }
    out
}

/// Columns `n, mu_max, tau_star, converged`. The markdown form is laid out
/// horizontally, one column per `n`.
pub fn write_mumax_table(results: &[MuMaxResult], path: &Path, format: TableFormat) -> Result<(), IoError> {
    check_table(results, path)?;
    write_file(path, &mumax_table(results, format))
}

/// Header `k,p`, rows `0..=n`. Refuses to write a distribution that is not
/// normalised to within `1e−9`.
pub fn write_distribution(dist: &PairDistribution, path: &Path) -> Result<(), IoError> {
    let sum = dist.total();
    if !((sum - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(IoError::NotNormalized { path: path.to_path_buf(), sum });
    }
    let mut out = String::from("k,p\n");
    for (k, p) in dist.p.iter().enumerate() {
        let _ = writeln!(out, "{k},{}", fmt_f64(*p));
    }
    write_file(path, &out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigestMismatch {
    Missing(String),
    Changed { path: String, expected: String, found: String },
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn start(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: BTreeMap::new(),
            started: now_rfc3339(),
            finished: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    /// Records an already written file living in `dir`.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<(), IoError> {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| IoError::io(&path, e))?;
        self.outputs.push(OutputRecord { path: name.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf, IoError> {
        self.finished = now_rfc3339();
        let path = dir.join(Self::FILE_NAME);
        let mut text =
            serde_json::to_string_pretty(&self).map_err(|source| IoError::Json { path: path.clone(), source })?;
        text.push('\n');
        write_file(&path, &text)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
    }

    /// Recomputes every listed digest relative to `dir`.
    pub fn verify(&self, dir: &Path) -> Vec<DigestMismatch> {
        self.outputs
            .iter()
            .filter_map(|o| match fs::read(dir.join(&o.path)) {
                Err(_) => Some(DigestMismatch::Missing(o.path.clone())),
                Ok(bytes) => {
                    let found = sha256_hex(&bytes);
                    (found != o.sha256).then(|| DigestMismatch::Changed {
                        path: o.path.clone(),
                        expected: o.sha256.clone(),
                        found,
                    })
                }
            })
            .collect()
    }
}
