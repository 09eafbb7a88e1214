//! Seeded instances and environment traces.
//!
//! Every random quantity of a run comes from its own ChaCha stream keyed by
//! the seed, so adding an algorithm or changing `T` never shifts the draws of
//! another component.

use std::path::Path;

use anyhow::{ensure, Context as _, Result};
use ctxstack::markets::{AuctionSpec, ItemValuation, PersuasionSpec};
use ctxstack::reduction::EnvironmentTrace;
use ctxstack::{Context, GameSpec, MixedStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::config::{ContextProcess, ExperimentConfig, FollowerProcess, Setting};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Instance = 0,
    TypeDistribution = 1,
    Contexts = 2,
    Followers = 3,
    LeaderSampling = 4,
    RandomBaseline = 5,
    Engine = 6,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

fn uniform_pm1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// Divides every entry by the largest form norm when it exceeds 1.
fn rescale_forms(values: &mut [f64], d: usize) {
    let worst = values
        .chunks(d)
        .map(|f| f.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if worst > 1.0 {
        for v in values.iter_mut() {
            *v /= worst;
        }
    }
}

/// Random game with entries iid uniform on `[-1, 1]`, rescaled into the
/// utility range. Without context-dependent followers, follower forms only
/// weigh coordinate 0, which the default context process pins to 1.
pub fn generate_game(
    seed: u64,
    d: usize,
    types: usize,
    leader_actions: usize,
    follower_actions: usize,
    context_dependent_followers: bool,
) -> Result<GameSpec> {
    let mut rng = stream(seed, Stream::Instance);
    let mut leader: Vec<f64> = (0..leader_actions * follower_actions * d)
        .map(|_| uniform_pm1(&mut rng))
        .collect();
    let mut followers: Vec<f64> = (0..types * leader_actions * follower_actions * d)
        .map(|i| {
            let v = uniform_pm1(&mut rng);
            if context_dependent_followers || i % d == 0 {
                v
            } else {
                0.0
            }
        })
        .collect();
    rescale_forms(&mut leader, d);
    rescale_forms(&mut followers, d);
    Ok(GameSpec::new(d, leader_actions, follower_actions, types, leader, followers)?)
}

/// Random auction: thresholds uniform on `[0, 1]`, valuations
/// `bias + <w, z>` with `bias` uniform on `[0, 1]` and small context weights,
/// jointly rescaled by the auction scale guard.
pub fn generate_auction(seed: u64, d: usize, types: usize, items: usize) -> Result<AuctionSpec> {
    let mut rng = stream(seed, Stream::Instance);
    let thresholds: Vec<Vec<f64>> = (0..types)
        .map(|_| (0..items).map(|_| rng.random::<f64>()).collect())
        .collect();
    let valuations: Vec<ItemValuation> = (0..items)
        .map(|_| ItemValuation {
            bias: rng.random::<f64>(),
            weights: (0..d).map(|_| 0.5 * uniform_pm1(&mut rng) / d as f64).collect(),
        })
        .collect();
    Ok(AuctionSpec::normalized(d, thresholds, valuations)?)
}

/// Random persuasion instance: the simplex `{μ >= 0, sum μ <= 1}` cut by `p`
/// random halfspaces that keep the origin, with type matrices uniform on
/// `[-1, 1]` rescaled by the persuasion scale guard.
pub fn generate_persuasion(seed: u64, d: usize, types: usize, signal_dim: usize) -> Result<PersuasionSpec> {
    let mut rng = stream(seed, Stream::Instance);
    let p = signal_dim;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for l in 0..p {
        let mut r = vec![0.0; p];
        r[l] = -1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    rows.push(vec![1.0; p]);
    rhs.push(1.0);
    for _ in 0..p {
        rows.push((0..p).map(|_| uniform_pm1(&mut rng)).collect());
        rhs.push(rng.random_range(0.3..=1.0));
    }
    let matrices: Vec<Vec<Vec<f64>>> = (0..types)
        .map(|_| {
            (0..d)
                .map(|_| (0..p).map(|_| uniform_pm1(&mut rng)).collect())
                .collect()
        })
        .collect();
    Ok(PersuasionSpec::normalized(d, p, rows, rhs, matrices)?)
}

/// Flat Dirichlet draw: normalized iid exponentials.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

/// Uniformly random mixed strategy.
pub fn random_strategy<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MixedStrategy {
    MixedStrategy::new(dirichlet(rng, n)).expect("normalized draw is a distribution")
}

pub enum Instance {
    Game(GameSpec),
    Auction(AuctionSpec),
    Persuasion(PersuasionSpec),
}

impl Instance {
    pub fn context_dim(&self) -> usize {
        match self {
            Instance::Game(g) => g.context_dim(),
            Instance::Auction(a) => a.context_dim(),
            Instance::Persuasion(p) => p.context_dim(),
        }
    }

    pub fn types(&self) -> usize {
        match self {
            Instance::Game(g) => g.types(),
            Instance::Auction(a) => a.types(),
            Instance::Persuasion(p) => p.types(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// The instance for one seed: loaded from the configured file, or generated.
pub fn build_instance(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let inst = match &cfg.setting {
        Setting::Game {
            d,
            types,
            leader_actions,
            follower_actions,
            context_dependent_followers,
            path,
        } => Instance::Game(match path {
            Some(p) => GameSpec::from_json(&read(p)?).with_context(|| format!("loading game {}", p.display()))?,
            None => generate_game(
                seed,
                *d,
                *types,
                *leader_actions,
                *follower_actions,
                *context_dependent_followers,
            )?,
        }),
        Setting::Auction { d, types, items, path } => Instance::Auction(match path {
            Some(p) => AuctionSpec::from_json(&read(p)?).with_context(|| format!("loading auction {}", p.display()))?,
            None => generate_auction(seed, *d, *types, *items)?,
        }),
        Setting::Persuasion {
            d,
            types,
            signal_dim,
            path,
        } => Instance::Persuasion(match path {
            Some(p) => {
                PersuasionSpec::from_json(&read(p)?).with_context(|| format!("loading persuasion {}", p.display()))?
            }
            None => generate_persuasion(seed, *d, *types, *signal_dim)?,
        }),
    };
    ensure!(
        inst.context_dim() == cfg.setting.context_dim() && inst.types() == cfg.setting.types(),
        "instance dimensions (d = {}, K = {}) differ from the config",
        inst.context_dim(),
        inst.types()
    );
    if let (Instance::Game(g), Setting::Game {
        leader_actions,
        follower_actions,
        ..
    }) = (&inst, &cfg.setting)
    {
        ensure!(
            g.leader_actions() == *leader_actions && g.follower_actions() == *follower_actions,
            "game action counts differ from the config"
        );
    }
    Ok(inst)
}

/// Contexts and follower types for one seed.
pub fn build_trace(cfg: &ExperimentConfig, seed: u64) -> Result<EnvironmentTrace> {
    let t = cfg.horizon;
    let d = cfg.setting.context_dim();
    let k = cfg.setting.types();
    let contexts: Vec<Context> = match &cfg.environment.contexts {
        ContextProcess::IidUniform { bias } => {
            let mut rng = stream(seed, Stream::Contexts);
            (0..t)
                .map(|_| {
                    let z = (0..d)
                        .map(|j| if *bias && j == 0 { 1.0 } else { uniform_pm1(&mut rng) })
                        .collect();
                    Context::new(z).expect("finite draws")
                })
                .collect()
        }
        ContextProcess::Scripted { path } => {
            let rows: Vec<Vec<f64>> =
                serde_json::from_str(&read(path)?).with_context(|| format!("parsing contexts {}", path.display()))?;
            ensure!(rows.len() >= t, "{} holds {} contexts, T = {t}", path.display(), rows.len());
            rows.into_iter()
                .take(t)
                .enumerate()
                .map(|(i, z)| {
                    ensure!(z.len() == d, "context {i} has dimension {}, expected {d}", z.len());
                    ensure!(z.iter().all(|v| v.abs() <= 1.0), "context {i} leaves [-1, 1]^d");
                    Ok(Context::new(z)?)
                })
                .collect::<Result<_>>()?
        }
    };
    let (followers, distribution) = match &cfg.environment.followers {
        FollowerProcess::Iid { distribution } => {
            let p = match distribution {
                Some(p) => p.clone(),
                None => dirichlet(&mut stream(seed, Stream::TypeDistribution), k),
            };
            let sampler = MixedStrategy::new(p.clone())?;
            let mut rng = stream(seed, Stream::Followers);
            let f = (0..t).map(|_| sampler.sample_with(rng.random::<f64>())).collect();
            (f, Some(p))
        }
        FollowerProcess::Scripted { path } => {
            let f: Vec<usize> =
                serde_json::from_str(&read(path)?).with_context(|| format!("parsing followers {}", path.display()))?;
            ensure!(f.len() >= t, "{} holds {} follower types, T = {t}", path.display(), f.len());
            ensure!(f.iter().all(|&i| i < k), "scripted follower type out of range 0..{k}");
            (f.into_iter().take(t).collect(), None)
        }
    };
    Ok(EnvironmentTrace::new(contexts, followers, distribution)?)
}
