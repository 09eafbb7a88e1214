use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use ctxstack::geometry::{region_dump, MenuOptions};
use ctxstack::{Context, GameSpec};
use ctxstack_harness::config::parse_seeds;
use ctxstack_harness::output::{regret_from_logs, write_outputs};
use ctxstack_harness::{run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ctxstack", version, about = "Leader learning in contextual Stackelberg games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write per-seed CSVs plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Seeds as `0..10`, `2..=4` or `1,5,9`; overrides the config.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute cumulative regret from a directory of CSV logs.
    Regret {
        #[arg(long)]
        log: PathBuf,
        /// Print the full series as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print best-response regions and the strategy menu of a game at a context.
    DumpMenu {
        #[arg(long)]
        game: PathBuf,
        /// Comma-separated context coordinates.
        #[arg(long, allow_hyphen_values = true)]
        context: String,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// Enumerate assignments over every type, not just distinct ones.
        #[arg(long)]
        no_reduce: bool,
        /// Drop dominated leader actions first.
        #[arg(long)]
        prune: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seeds, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s)?;
            }
            let dir = out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(cfg.name.clone().unwrap_or_else(|| cfg.hash()[..12].to_string())));
            let result = run_experiment(&cfg)?;
            write_outputs(&result, &dir)?;
            println!("config {}  T = {}  seeds = {}", result.summary.config_hash, cfg.horizon, cfg.seeds.len());
            for (name, s) in &result.summary.algorithms {
                let u = s.mean_cum_utility.last().copied().unwrap_or(0.0);
                let r = s.mean_cum_regret.last().copied().unwrap_or(0.0);
                let extra = s.explore_rounds.map(|t| format!("  (T_0 = {t})")).unwrap_or_default();
                println!("{name:>16}  cum utility {u:>10.3}  cum regret {r:>10.3}{extra}");
            }
            println!("wrote {}", dir.display());
        }
        Command::Regret { log, json } => {
            let reports = regret_from_logs(&log)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    let mean = r.mean_cum_regret.last().copied().unwrap_or(0.0);
                    println!("{:>16}  seeds {:>3}  mean final regret {mean:>10.3}", r.algorithm, r.seeds.len());
                }
            }
        }
        Command::DumpMenu {
            game,
            context,
            delta,
            no_reduce,
            prune,
        } => {
            let text = std::fs::read_to_string(&game).with_context(|| format!("reading {}", game.display()))?;
            let spec = GameSpec::from_json(&text)?;
            let z: Vec<f64> = context
                .split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad context entry {v:?}")))
                .collect::<Result<_>>()?;
            let at = spec.at(&Context::new(z)?)?;
            let options = MenuOptions {
                reduce_types: !no_reduce,
                prune_dominated: prune,
            };
            println!("{}", serde_json::to_string_pretty(&region_dump(&at, delta, options)?)?);
        }
    }
    Ok(())
}
