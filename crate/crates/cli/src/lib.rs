//! Batch experiment runner: JSON configs in, CSV results and JSON manifests out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;

use config::{validate_str, ExperimentConfig};
use experiments::{execute, Table};
use kobacore::hyperbolicity::{verdict_from, Thresholds};
use kobacore::GeomError;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Numerical(GeomError),
    IncompatibleManifests(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::IncompatibleManifests(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(errs) => {
                write!(f, "invalid config:")?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::IncompatibleManifests(m) => write!(f, "incompatible manifests: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<(Value, ExperimentConfig), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
    validate_str(&text).map_err(CliError::Validation)
}

pub fn validate(path: &Path) -> Result<(), CliError> {
    load_config(path).map(|_| ())
}

/// Renders a table as CSV text.
pub fn render_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&table.header).map_err(fail)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.render())).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub label: String,
    pub seed: u64,
    pub config: Value,
    pub config_sha256: String,
    /// CSV file name, relative to the manifest.
    pub csv: String,
    pub rows: usize,
    pub wall_time_seconds: f64,
    pub summary: Value,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Runs a config; relative output paths resolve against the config's directory.
/// Returns the CSV and manifest paths.
pub fn run(config_path: &Path, output: Option<&Path>) -> Result<(PathBuf, PathBuf), CliError> {
    let (echo, mut cfg) = load_config(config_path)?;
    if let Some(o) = output {
        cfg.set_output(o.to_path_buf());
    } else if cfg.output().is_relative() {
        let base = config_path.parent().unwrap_or(Path::new("."));
        cfg.set_output(base.join(cfg.output()));
    }
    let start = Instant::now();
    let outcome = execute(&cfg).map_err(CliError::Numerical)?;
    let wall = start.elapsed().as_secs_f64();
    let csv_path = cfg.output().clone();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let bytes = render_csv(&outcome.table)?;
    fs::write(&csv_path, &bytes).map_err(|e| io_err(&csv_path, e))?;
    let canonical = serde_json::to_vec(&echo).map_err(|e| CliError::Io(e.to_string()))?;
    let manifest = Manifest {
        tool: "kobacore".into(),
        version: VERSION.into(),
        experiment: cfg.kind().into(),
        label: outcome.label,
        seed: cfg.seed(),
        config: echo,
        config_sha256: hex::encode(Sha256::digest(&canonical)),
        csv: csv_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        rows: outcome.table.rows.len(),
        wall_time_seconds: wall,
        summary: outcome.summary,
    };
    let mpath = manifest_path(&csv_path);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&mpath, text + "\n").map_err(|e| io_err(&mpath, e))?;
    Ok((csv_path, mpath))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOutput {
    /// Summary CSV: one row per input.
    pub summary: Vec<u8>,
    /// Joined result rows when requested; identical to the input CSV for a
    /// single input.
    pub merged: Option<Vec<u8>>,
    pub mixed_seeds: bool,
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| io_err(path, e))?;
    Ok((header, rows))
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Option<Vec<f64>> {
    let i = header.iter().position(|h| h == name)?;
    rows.iter().map(|r| r.get(i).and_then(|x| x.parse().ok())).collect()
}

/// Classifies every scan among the inputs and optionally joins their CSVs.
pub fn report(manifests: &[PathBuf], merge: bool) -> Result<ReportOutput, CliError> {
    if manifests.is_empty() {
        return Err(CliError::Validation(vec!["report needs at least one manifest".into()]));
    }
    let mut loaded = Vec::new();
    for path in manifests {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
        let csv_path = path.parent().unwrap_or(Path::new(".")).join(&m.csv);
        let bytes = fs::read(&csv_path).map_err(|e| io_err(&csv_path, e))?;
        let (header, rows) = read_csv(&csv_path)?;
        loaded.push((path, m, bytes, header, rows));
    }
    if let Some((_, m, ..)) = loaded.iter().find(|(_, m, ..)| m.version != loaded[0].1.version || m.tool != loaded[0].1.tool) {
        return Err(CliError::IncompatibleManifests(format!("tool versions {} and {} differ", loaded[0].1.version, m.version)));
    }
    let mixed_seeds = loaded.iter().any(|(_, m, ..)| m.seed != loaded[0].1.seed);

    let merged = if !merge {
        None
    } else if loaded.len() == 1 {
        Some(loaded[0].2.clone())
    } else {
        let header = &loaded[0].3;
        if let Some((p, ..)) = loaded.iter().find(|l| &l.3 != header) {
            return Err(CliError::IncompatibleManifests(format!("{} has a different CSV header", p.display())));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(std::iter::once("source").chain(header.iter().map(String::as_str))).map_err(fail)?;
        for (_, m, _, _, rows) in &loaded {
            for r in rows {
                w.write_record(std::iter::once(m.label.as_str()).chain(r.iter().map(String::as_str))).map_err(fail)?;
            }
        }
        Some(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["source", "experiment", "label", "seed", "scales", "growth_ratio", "slope_per_doubling", "verdict", "warning"])
        .map_err(fail)?;
    for (path, m, _, header, rows) in &loaded {
        let scan = column(header, rows, "scale").zip(column(header, rows, "delta"));
        let (scales, ratio, slope, verdict) = match scan.map(|(s, d)| (s.len(), verdict_from(&s, &d, Thresholds::default()))) {
            Some((n, Ok(v))) => {
                (n.to_string(), format!("{:.16e}", v.growth_ratio), format!("{:.16e}", v.slope_per_doubling), v.verdict.as_str().to_string())
            }
            Some((n, Err(_))) => (n.to_string(), String::new(), String::new(), "too-few-scales".into()),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let warning = if mixed_seeds { "mixed_seeds" } else { "" };
        w.write_record([
            path.display().to_string(),
            m.experiment.clone(),
            m.label.clone(),
            m.seed.to_string(),
            scales,
            ratio,
            slope,
            verdict,
            warning.to_string(),
        ])
        .map_err(fail)?;
    }
    let summary = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(ReportOutput { summary, merged, mixed_seeds })
}

/// Caps the global worker pool from `KOBACORE_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    match std::env::var("KOBACORE_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| CliError::Validation(vec![format!("KOBACORE_THREADS must be a positive integer, got \"{v}\"")]))?;
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))
        }
        Err(_) => Ok(()),
    }
}
