//! Runs a configured experiment over its seeds and aggregates the results.

use std::collections::BTreeMap;

use anyhow::{Context as _, Result};
use ctxstack::bandit::{ExplorationConfig, ForcedExploration, LinearBandit, Oful, ScaledWrapper};
use ctxstack::markets::{run_application_episode, simplex_grid, Application, SimplexGrid};
use ctxstack::reduction::{run_episode, BanditSelector, EnvironmentTrace, EpisodeLog, MenuCache, StrategySelector};
use ctxstack::GameSpec;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{ExploreThenCommit, RandomBaseline};
use crate::config::{Algorithm, ExperimentConfig};
use crate::generate::{build_instance, build_trace, stream, Instance, Stream};
use crate::regret::{application_regret, game_regret, RegretReport};

/// One algorithm's episode on one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Exploration budget, for explore-then-commit.
    pub explore_rounds: Option<usize>,
    pub log: EpisodeLog,
    pub report: RegretReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub explore_rounds: usize,
    pub mean_final_utility: f64,
}

/// Cross-seed series for one algorithm. Utilities are expected utilities
/// under the comparator weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub mean_cum_utility: Vec<f64>,
    pub std_cum_utility: Vec<f64>,
    pub mean_cum_regret: Vec<f64>,
    pub std_cum_regret: Vec<f64>,
    pub mean_cum_realized_utility: Vec<f64>,
    pub final_cum_utility: Vec<f64>,
    pub final_cum_regret: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub config_hash: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub mode: String,
    pub algorithms: BTreeMap<String, AlgorithmSummary>,
}

pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub summary: Summary,
    /// Reported runs, grouped by algorithm and ordered by seed.
    pub runs: BTreeMap<Algorithm, Vec<SeedRun>>,
}

/// Mean and sample standard deviation (`n - 1` denominator) at each index.
pub fn mean_std(series: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let n = series.len();
    let len = series.first().map_or(0, |s| s.len());
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for t in 0..len {
        let m = series.iter().map(|s| s[t]).sum::<f64>() / n as f64;
        mean[t] = m;
        if n > 1 {
            let var = series.iter().map(|s| (s[t] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            std[t] = var.sqrt();
        }
    }
    (mean, std)
}

fn engine(alg: Algorithm, dim: usize, cfg: &ExperimentConfig, seed: u64) -> Result<Box<dyn LinearBandit + Send>> {
    Ok(match alg {
        Algorithm::Alg1Oful | Algorithm::AuctionOful | Algorithm::PersuasionOful => Box::new(Oful::new(dim, cfg.oful)?),
        Algorithm::Alg1Adv | Algorithm::AuctionAdv | Algorithm::PersuasionAdv => {
            let inner_seed = stream(seed, Stream::Engine)
                .random::<u64>()
                .wrapping_add(cfg.exploration.seed);
            let inner = ForcedExploration::new(
                dim,
                ExplorationConfig {
                    seed: inner_seed,
                    ..cfg.exploration
                },
            )?;
            Box::new(ScaledWrapper::new(inner, dim)?)
        }
        Algorithm::Random | Algorithm::Etc => unreachable!("baselines have no engine"),
    })
}

fn etc_budgets(cfg: &ExperimentConfig) -> Vec<usize> {
    if cfg.etc.sweep.is_empty() {
        vec![cfg.etc.explore_rounds]
    } else {
        cfg.etc.sweep.clone()
    }
}

fn run_game_seed(cfg: &ExperimentConfig, seed: u64, game: &GameSpec, trace: &EnvironmentTrace) -> Result<Vec<SeedRun>> {
    let mut cache = MenuCache::new(cfg.delta(), cfg.menu)?;
    let mut out = Vec::new();
    for &alg in &cfg.algorithms {
        let mut variants: Vec<(Option<usize>, Box<dyn StrategySelector>)> = Vec::new();
        match alg {
            Algorithm::Random => variants.push((None, Box::new(RandomBaseline::new(stream(seed, Stream::RandomBaseline))))),
            Algorithm::Etc => {
                for t0 in etc_budgets(cfg) {
                    variants.push((Some(t0), Box::new(ExploreThenCommit::new(t0, game.types()))));
                }
            }
            _ => variants.push((
                None,
                Box::new(BanditSelector(engine(alg, cfg.mode.dim(game), cfg, seed)?)),
            )),
        }
        for (explore_rounds, mut selector) in variants {
            let mut rng = stream(seed, Stream::LeaderSampling);
            let log = run_episode(game, trace, selector.as_mut(), cfg.mode, &mut cache, cfg.verbose, &mut rng)
                .with_context(|| format!("{alg} on seed {seed}"))?;
            let report = game_regret(game, trace, &log, &mut cache)?;
            out.push(SeedRun {
                algorithm: alg,
                seed,
                explore_rounds,
                log,
                report,
            });
        }
    }
    Ok(out)
}

fn run_application_seed<A: Application + ?Sized>(
    cfg: &ExperimentConfig,
    seed: u64,
    app: &A,
    grid: &SimplexGrid,
    trace: &EnvironmentTrace,
) -> Result<Vec<SeedRun>> {
    cfg.algorithms
        .iter()
        .map(|&alg| {
            let mut e = engine(alg, app.types(), cfg, seed)?;
            let log = run_application_episode(app, grid, trace, e.as_mut(), cfg.verbose)
                .with_context(|| format!("{alg} on seed {seed}"))?;
            let report = application_regret(app, grid, trace, &log)?;
            Ok(SeedRun {
                algorithm: alg,
                seed,
                explore_rounds: None,
                log,
                report,
            })
        })
        .collect()
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, grid: Option<&SimplexGrid>) -> Result<Vec<SeedRun>> {
    let instance = build_instance(cfg, seed)?;
    let trace = build_trace(cfg, seed)?;
    match &instance {
        Instance::Game(g) => run_game_seed(cfg, seed, g, &trace),
        Instance::Auction(a) => run_application_seed(cfg, seed, a, grid.expect("grid built"), &trace),
        Instance::Persuasion(p) => run_application_seed(cfg, seed, p, grid.expect("grid built"), &trace),
    }
}

fn summarize(runs: &[&SeedRun]) -> AlgorithmSummary {
    let utility: Vec<&[f64]> = runs.iter().map(|r| r.report.cumulative_utility.as_slice()).collect();
    let regret: Vec<&[f64]> = runs.iter().map(|r| r.report.cumulative_regret.as_slice()).collect();
    let realized: Vec<&[f64]> = runs.iter().map(|r| r.report.cumulative_realized.as_slice()).collect();
    let (mean_cum_utility, std_cum_utility) = mean_std(&utility);
    let (mean_cum_regret, std_cum_regret) = mean_std(&regret);
    let (mean_cum_realized_utility, _) = mean_std(&realized);
    AlgorithmSummary {
        mean_cum_utility,
        std_cum_utility,
        mean_cum_regret,
        std_cum_regret,
        mean_cum_realized_utility,
        final_cum_utility: utility.iter().map(|s| s.last().copied().unwrap_or(0.0)).collect(),
        final_cum_regret: regret.iter().map(|s| s.last().copied().unwrap_or(0.0)).collect(),
        explore_rounds: runs.first().and_then(|r| r.explore_rounds),
        sweep: Vec::new(),
    }
}

/// Runs every seed (in parallel) and every configured algorithm.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let grid = match cfg.setting {
        crate::config::Setting::Game { .. } => None,
        _ => Some(simplex_grid(cfg.setting.types(), cfg.grid_n(), cfg.grid_cap)?),
    };
    let per_seed: Vec<Vec<SeedRun>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, grid.as_ref()))
        .collect::<Result<_>>()?;
    let mut all: BTreeMap<Algorithm, Vec<SeedRun>> = BTreeMap::new();
    for run in per_seed.into_iter().flatten() {
        all.entry(run.algorithm).or_default().push(run);
    }

    let mut algorithms = BTreeMap::new();
    let mut runs = BTreeMap::new();
    for (alg, alg_runs) in all {
        let (summary, kept) = if alg == Algorithm::Etc {
            let mut by_budget: BTreeMap<usize, Vec<SeedRun>> = BTreeMap::new();
            for r in alg_runs {
                by_budget.entry(r.explore_rounds.unwrap_or(0)).or_default().push(r);
            }
            let mut sweep = Vec::new();
            let mut best: Option<(f64, usize)> = None;
            for (&t0, rs) in &by_budget {
                let s = summarize(&rs.iter().collect::<Vec<_>>());
                let value = s.mean_cum_utility.last().copied().unwrap_or(0.0);
                sweep.push(SweepPoint {
                    explore_rounds: t0,
                    mean_final_utility: value,
                });
                if best.is_none_or(|(v, _)| value > v) {
                    best = Some((value, t0));
                }
            }
            let t0 = best.map(|b| b.1).unwrap_or(0);
            let chosen = by_budget.remove(&t0).unwrap_or_default();
            let mut s = summarize(&chosen.iter().collect::<Vec<_>>());
            if sweep.len() > 1 {
                s.sweep = sweep;
            }
            (s, chosen)
        } else {
            (summarize(&alg_runs.iter().collect::<Vec<_>>()), alg_runs)
        };
        algorithms.insert(alg.name().to_string(), summary);
        runs.insert(alg, kept);
    }
    let summary = Summary {
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        horizon: cfg.horizon,
        seeds: cfg.seeds.clone(),
        mode: cfg.mode.as_str().to_string(),
        algorithms,
    };
    Ok(ExperimentResult {
        config: cfg.clone(),
        summary,
        runs,
    })
}
