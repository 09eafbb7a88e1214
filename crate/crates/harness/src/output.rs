//! Per-seed CSV logs, `summary.json` and `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use ctxstack::reduction::RoundRecord;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig};
use crate::run::{mean_std, ExperimentResult};

/// One CSV row. Vectors are `;`-joined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: usize,
    pub seed: u64,
    pub algorithm: String,
    pub mode: String,
    pub chosen_index: Option<usize>,
    pub sampled_leader_action: Option<usize>,
    pub follower_type: usize,
    pub realized_utility: f64,
    pub menu_best_utility: f64,
    pub expected_utility: f64,
    pub follower_action: Option<usize>,
    pub menu_size: usize,
    pub strategy: String,
    pub context: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_diagonal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

pub fn split(field: &str) -> Result<Vec<f64>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|v| v.parse::<f64>().with_context(|| format!("bad number {v:?}")))
        .collect()
}

impl CsvRow {
    pub fn from_record(r: &RoundRecord, seed: u64, algorithm: &str, mode: &str) -> Self {
        Self {
            t: r.t,
            seed,
            algorithm: algorithm.to_string(),
            mode: mode.to_string(),
            chosen_index: r.chosen_index,
            sampled_leader_action: r.sampled_leader_action,
            follower_type: r.follower_type,
            realized_utility: r.realized_utility,
            menu_best_utility: r.menu_best_utility,
            expected_utility: r.expected_utility,
            follower_action: r.follower_action,
            menu_size: r.menu_size,
            strategy: join(&r.strategy),
            context: join(&r.context),
            estimate: r.engine_state.as_ref().map(|s| join(&s.estimate)),
            gram_diagonal: r.engine_state.as_ref().map(|s| join(&s.gram_diagonal)),
            radius: r.engine_state.as_ref().map(|s| s.radius),
        }
    }
}

pub fn log_file_name(algorithm: Algorithm, seed: u64) -> String {
    format!("{}_seed{seed}.csv", algorithm.name())
}

pub fn write_rows(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .map(|row| row.with_context(|| format!("reading {}", path.display())))
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    config: &'a ExperimentConfig,
    files: Vec<String>,
}

/// Writes every reported run plus the summary and manifest into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mode = result.config.mode.as_str();
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (alg, runs) in &result.runs {
        for run in runs {
            let name = log_file_name(*alg, run.seed);
            let rows: Vec<CsvRow> = run
                .log
                .records
                .iter()
                .map(|r| CsvRow::from_record(r, run.seed, alg.name(), mode))
                .collect();
            let path = dir.join(&name);
            write_rows(&path, &rows)?;
            files.push(name);
            written.push(path);
        }
    }
    let summary = dir.join("summary.json");
    fs::write(&summary, serde_json::to_string_pretty(&result.summary)? + "\n")?;
    written.push(summary);
    let mut config = result.config.clone();
    config.out = None;
    let manifest = Manifest {
        config_hash: result.summary.config_hash.clone(),
        config: &config,
        files,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}

/// Regret recomputed from CSV logs: per-round `menu_best_utility -
/// expected_utility`, which matches the in-memory report whenever contexts
/// do not repeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegret {
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub final_regret: Vec<f64>,
    pub mean_cum_regret: Vec<f64>,
    pub mean_cum_realized_utility: Vec<f64>,
}

pub fn regret_from_logs(dir: &Path) -> Result<Vec<LogRegret>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no CSV logs in {}", dir.display());
    }
    let mut by_alg: BTreeMap<String, Vec<(u64, Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for p in paths {
        let rows = read_rows(&p)?;
        let Some(first) = rows.first() else { continue };
        let mut regret = Vec::with_capacity(rows.len());
        let mut realized = Vec::with_capacity(rows.len());
        let (mut acc_r, mut acc_u) = (0.0, 0.0);
        for r in &rows {
            acc_r += r.menu_best_utility - r.expected_utility;
            acc_u += r.realized_utility;
            regret.push(acc_r);
            realized.push(acc_u);
        }
        by_alg
            .entry(first.algorithm.clone())
            .or_default()
            .push((first.seed, regret, realized));
    }
    Ok(by_alg
        .into_iter()
        .map(|(algorithm, mut runs)| {
            runs.sort_by_key(|r| r.0);
            let regrets: Vec<&[f64]> = runs.iter().map(|r| r.1.as_slice()).collect();
            let realized: Vec<&[f64]> = runs.iter().map(|r| r.2.as_slice()).collect();
            LogRegret {
                algorithm,
                seeds: runs.iter().map(|r| r.0).collect(),
                final_regret: runs.iter().map(|r| r.1.last().copied().unwrap_or(0.0)).collect(),
                mean_cum_regret: mean_std(&regrets).0,
                mean_cum_realized_utility: mean_std(&realized).0,
            }
        })
        .collect())
}
