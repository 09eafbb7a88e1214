//! Experiment configuration, validation and hashing.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context as _, Result};
use ctxstack::bandit::{ExplorationConfig, OfulConfig};
use ctxstack::geometry::MenuOptions;
use ctxstack::reduction::Mode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Largest policy grid built unless the config raises it.
pub const DEFAULT_GRID_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "alg1-oful")]
    Alg1Oful,
    #[serde(rename = "alg1-adv")]
    Alg1Adv,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "etc")]
    Etc,
    #[serde(rename = "auction-oful")]
    AuctionOful,
    #[serde(rename = "auction-adv")]
    AuctionAdv,
    #[serde(rename = "persuasion-oful")]
    PersuasionOful,
    #[serde(rename = "persuasion-adv")]
    PersuasionAdv,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Alg1Oful,
        Algorithm::Alg1Adv,
        Algorithm::Random,
        Algorithm::Etc,
        Algorithm::AuctionOful,
        Algorithm::AuctionAdv,
        Algorithm::PersuasionOful,
        Algorithm::PersuasionAdv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg1Oful => "alg1-oful",
            Algorithm::Alg1Adv => "alg1-adv",
            Algorithm::Random => "random",
            Algorithm::Etc => "etc",
            Algorithm::AuctionOful => "auction-oful",
            Algorithm::AuctionAdv => "auction-adv",
            Algorithm::PersuasionOful => "persuasion-oful",
            Algorithm::PersuasionAdv => "persuasion-adv",
        }
    }

    fn setting(self) -> SettingKind {
        match self {
            Algorithm::AuctionOful | Algorithm::AuctionAdv => SettingKind::Auction,
            Algorithm::PersuasionOful | Algorithm::PersuasionAdv => SettingKind::Persuasion,
            _ => SettingKind::Game,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| anyhow::anyhow!("unknown algorithm {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SettingKind {
    Game,
    Auction,
    Persuasion,
}

/// The instance family. Each seed draws a fresh instance unless a file is
/// given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Setting {
    Game {
        d: usize,
        #[serde(rename = "K")]
        types: usize,
        #[serde(rename = "A_l")]
        leader_actions: usize,
        #[serde(rename = "A_f")]
        follower_actions: usize,
        #[serde(default)]
        context_dependent_followers: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
    Auction {
        d: usize,
        #[serde(rename = "K")]
        types: usize,
        items: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
    Persuasion {
        d: usize,
        #[serde(rename = "K")]
        types: usize,
        signal_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
}

impl Setting {
    fn kind(&self) -> SettingKind {
        match self {
            Setting::Game { .. } => SettingKind::Game,
            Setting::Auction { .. } => SettingKind::Auction,
            Setting::Persuasion { .. } => SettingKind::Persuasion,
        }
    }

    pub fn context_dim(&self) -> usize {
        match self {
            Setting::Game { d, .. } | Setting::Auction { d, .. } | Setting::Persuasion { d, .. } => *d,
        }
    }

    pub fn types(&self) -> usize {
        match self {
            Setting::Game { types, .. } | Setting::Auction { types, .. } | Setting::Persuasion { types, .. } => *types,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContextProcess {
    /// Coordinates iid uniform on `[-1, 1]`; with `bias`, coordinate 0 is
    /// fixed to 1.
    IidUniform {
        #[serde(default = "yes")]
        bias: bool,
    },
    /// A JSON array of context vectors; the first `T` are used.
    Scripted { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FollowerProcess {
    /// Types iid from `p*`; `p*` is drawn from a flat Dirichlet per seed
    /// unless given.
    Iid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distribution: Option<Vec<f64>>,
    },
    /// A JSON array of 0-based type indices; the first `T` are used.
    Scripted { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    #[serde(default = "default_contexts")]
    pub contexts: ContextProcess,
    #[serde(default = "default_followers")]
    pub followers: FollowerProcess,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            contexts: default_contexts(),
            followers: default_followers(),
        }
    }
}

fn default_contexts() -> ContextProcess {
    ContextProcess::IidUniform { bias: true }
}

fn default_followers() -> FollowerProcess {
    FollowerProcess::Iid { distribution: None }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtcConfig {
    /// Exploration rounds `T_0`.
    #[serde(default = "default_explore")]
    pub explore_rounds: usize,
    /// Candidate `T_0` values; the one with the best mean final utility is
    /// reported.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<usize>,
}

fn default_explore() -> usize {
    100
}

impl Default for EtcConfig {
    fn default() -> Self {
        Self {
            explore_rounds: default_explore(),
            sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub setting: Setting,
    #[serde(default)]
    pub environment: Environment,
    /// Menu perturbation radius; `1/T` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub menu: MenuOptions,
    /// Policy grid granularity for auctions and persuasion; `min(T, 20)` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<u32>,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: usize,
    #[serde(default)]
    pub oful: OfulConfig,
    #[serde(default)]
    pub exploration: ExplorationConfig,
    #[serde(default)]
    pub etc: EtcConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Adds engine state columns to the per-round CSV.
    #[serde(default)]
    pub verbose: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_mode() -> Mode {
    Mode::Known
}

fn default_grid_cap() -> usize {
    DEFAULT_GRID_CAP
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).context("parsing experiment config")?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_json(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.setting {
            Setting::Game { path: Some(p), .. }
            | Setting::Auction { path: Some(p), .. }
            | Setting::Persuasion { path: Some(p), .. } => fix(p),
            _ => {}
        }
        if let ContextProcess::Scripted { path } = &mut self.environment.contexts {
            fix(path);
        }
        if let FollowerProcess::Scripted { path } = &mut self.environment.followers {
            fix(path);
        }
        if let Some(p) = &mut self.out {
            fix(p);
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(1.0 / self.horizon as f64)
    }

    pub fn grid_n(&self) -> u32 {
        self.grid_n
            .unwrap_or_else(|| self.horizon.min(20) as u32)
            .max(1)
    }

    /// Checks everything that can be checked before touching instance files.
    pub fn validate(&self) -> Result<()> {
        ensure!(self.horizon >= 1, "T must be at least 1");
        ensure!(!self.algorithms.is_empty(), "no algorithm selected");
        ensure!(!self.seeds.is_empty(), "no seeds selected");
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        ensure!(seen.len() == self.algorithms.len(), "an algorithm is listed twice");
        let d = self.setting.context_dim();
        ensure!(d >= 1 && self.setting.types() >= 1, "d and K must be positive");
        if let Setting::Game {
            leader_actions,
            follower_actions,
            ..
        } = self.setting
        {
            ensure!(leader_actions >= 2, "A_l must be at least 2");
            ensure!(follower_actions >= 1, "A_f must be positive");
        }
        if let Some(delta) = self.delta {
            ensure!(delta > 0.0 && delta.is_finite(), "delta must be positive");
        }
        if let FollowerProcess::Iid { distribution: Some(p) } = &self.environment.followers {
            ensure!(p.len() == self.setting.types(), "follower distribution must have K entries");
            let sum: f64 = p.iter().sum();
            ensure!(
                p.iter().all(|v| *v >= 0.0) && (sum - 1.0).abs() <= 1e-9,
                "follower distribution must be a probability vector"
            );
        }
        for &alg in &self.algorithms {
            if alg.setting() != self.setting.kind() {
                bail!("algorithm {alg} does not apply to this setting");
            }
            if self.mode == Mode::Unknown {
                match alg {
                    Algorithm::Alg1Oful => ensure!(
                        matches!(self.environment.followers, FollowerProcess::Iid { .. }),
                        "alg1-oful with unknown utilities needs stochastic followers"
                    ),
                    Algorithm::Alg1Adv => ensure!(
                        matches!(self.environment.contexts, ContextProcess::IidUniform { .. }),
                        "alg1-adv with unknown utilities needs stochastic contexts"
                    ),
                    Algorithm::Random => {}
                    Algorithm::Etc => bail!("etc needs the leader's utilities; not available in unknown-utilities mode"),
                    _ => bail!("{alg} supports known utilities only"),
                }
            }
            if alg == Algorithm::Etc {
                if let Setting::Game {
                    context_dependent_followers: true,
                    ..
                } = self.setting
                {
                    bail!("etc is not applicable when follower utilities depend on the context");
                }
                ensure!(
                    self.etc.explore_rounds >= 1 && self.etc.sweep.iter().all(|&t| t >= 1),
                    "etc exploration budgets must be positive"
                );
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the config without its output
    /// directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Parses `0..10`, `3..=5`, `7` or `1,4,9`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        ensure!(a <= b, "empty seed range {s}");
        return Ok((a..=b).collect());
    }
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        ensure!(a < b, "empty seed range {s}");
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<u64>().with_context(|| format!("bad seed {p:?}")))
        .collect()
}
