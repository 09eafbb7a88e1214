use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::embedding::h_embedding_at;
use crate::bandit::{EngineSnapshot, LinearBandit};
use crate::error::{invalid, Error, Result};
use crate::game::{dot, Context, GameAtContext, GameSpec, MixedStrategy};
use crate::geometry::{approximate_extreme_points_at, ExtremePointSet, MenuOptions};

/// Which vectors the engine sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Utility vectors `u(z, x)` in `R^K`.
    Known,
    /// Embeddings `h(z, x)` in `R^{d K A_l A_f}`.
    #[serde(rename = "unknown-utilities")]
    Unknown,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Known => "known",
            Mode::Unknown => "unknown-utilities",
        }
    }

    /// Dimension of the engine's vectors for `game`.
    pub fn dim(self, game: &GameSpec) -> usize {
        match self {
            Mode::Known => game.types(),
            Mode::Unknown => super::EmbeddingDims::of(game).len(),
        }
    }
}

/// The engine-facing vectors of one round, parallel to the menu strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundActionSet {
    pub vectors: Vec<Vec<f64>>,
    pub strategies: Vec<MixedStrategy>,
    /// `u(z, x)` for each strategy, whatever the mode.
    pub utilities: Vec<Vec<f64>>,
    pub mode: Mode,
}

impl RoundActionSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Best `<u(z, x), w>` over the menu.
    pub fn best_weighted(&self, weights: &[f64]) -> f64 {
        self.utilities
            .iter()
            .map(|u| dot(u, weights))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn build_action_set(game: &GameSpec, z: &Context, menu: &ExtremePointSet, mode: Mode) -> Result<RoundActionSet> {
    build_at(&game.at(z)?, z, menu, mode)
}

fn build_at(at: &GameAtContext, z: &Context, menu: &ExtremePointSet, mode: Mode) -> Result<RoundActionSet> {
    if menu.is_empty() {
        return Err(Error::EmptyMenu("no strategies to offer the engine".into()));
    }
    let strategies: Vec<MixedStrategy> = menu.strategies().cloned().collect();
    let utilities = strategies
        .iter()
        .map(|x| Ok(at.utility_vector(x)?.values))
        .collect::<Result<Vec<_>>>()?;
    let vectors = match mode {
        Mode::Known => utilities.clone(),
        Mode::Unknown => strategies
            .iter()
            .map(|x| h_embedding_at(at, z, x))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(RoundActionSet {
        vectors,
        strategies,
        utilities,
        mode,
    })
}

/// Contexts and follower types for a whole episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentTrace {
    pub contexts: Vec<Context>,
    pub followers: Vec<usize>,
    /// `p*` when followers are drawn iid from it; `None` for scripted
    /// sequences.
    pub type_distribution: Option<Vec<f64>>,
}

impl EnvironmentTrace {
    pub fn new(contexts: Vec<Context>, followers: Vec<usize>, type_distribution: Option<Vec<f64>>) -> Result<Self> {
        if contexts.len() != followers.len() {
            return Err(invalid(format!(
                "{} contexts but {} follower draws",
                contexts.len(),
                followers.len()
            )));
        }
        if let Some(p) = &type_distribution {
            let sum: f64 = p.iter().sum();
            if p.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(invalid("type distribution must be a probability vector"));
            }
        }
        Ok(Self {
            contexts,
            followers,
            type_distribution,
        })
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Checks the trace against a game's dimensions.
    pub fn validate_for(&self, game: &GameSpec) -> Result<()> {
        self.validate_dims(game.context_dim(), game.types())
    }

    pub fn validate_dims(&self, context_dim: usize, types: usize) -> Result<()> {
        if let Some(z) = self.contexts.iter().find(|z| z.dim() != context_dim) {
            return Err(invalid(format!(
                "context of dimension {} where d = {context_dim}",
                z.dim()
            )));
        }
        if let Some(f) = self.followers.iter().find(|&&f| f >= types) {
            return Err(invalid(format!("follower type {f} out of range {types}")));
        }
        if let Some(p) = &self.type_distribution {
            if p.len() != types {
                return Err(invalid("type distribution length differs from K"));
            }
        }
        Ok(())
    }

    /// Weights the comparator and the expected-utility column use in round
    /// `t` (0-based): `p*` for iid followers, the indicator of the served type
    /// otherwise.
    pub fn comparator_weights(&self, t: usize, types: usize) -> Vec<f64> {
        match &self.type_distribution {
            Some(p) => p.clone(),
            None => {
                let mut w = vec![0.0; types];
                w[self.followers[t]] = 1.0;
                w
            }
        }
    }
}

/// Memoizes menus. Keys are the exact bit patterns of the follower matrices
/// at the context (and of the leader matrix when pruning is on), so repeated
/// contexts and context-free followers both hit.
#[derive(Debug, Clone)]
pub struct MenuCache {
    delta: f64,
    options: MenuOptions,
    entries: HashMap<Vec<u64>, Arc<ExtremePointSet>>,
    misses: usize,
}

impl MenuCache {
    pub fn new(delta: f64, options: MenuOptions) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(invalid(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            delta,
            options,
            entries: HashMap::new(),
            misses: 0,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of menus actually computed.
    pub fn computed(&self) -> usize {
        self.misses
    }

    pub fn menu(&mut self, at: &GameAtContext) -> Result<Arc<ExtremePointSet>> {
        let mut key: Vec<u64> = at.follower_matrices().iter().map(|v| v.to_bits()).collect();
        if self.options.prune_dominated {
            key.extend(at.leader_matrix().iter().map(|v| v.to_bits()));
        }
        if let Some(m) = self.entries.get(&key) {
            return Ok(Arc::clone(m));
        }
        let menu = Arc::new(approximate_extreme_points_at(at, self.delta, self.options)?);
        if menu.is_empty() {
            return Err(Error::EmptyMenu("geometry produced no certified strategy".into()));
        }
        self.misses += 1;
        self.entries.insert(key, Arc::clone(&menu));
        Ok(menu)
    }
}

/// Everything a strategy selector may look at in one round.
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    /// 0-based round index.
    pub t: usize,
    pub game: &'a GameSpec,
    pub context: &'a Context,
    pub at: &'a GameAtContext,
    pub menu: &'a ExtremePointSet,
    pub actions: &'a RoundActionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    /// Index into the round's menu.
    Menu(usize),
    /// A strategy outside the menu.
    OffMenu(MixedStrategy),
}

/// What the leader observes after committing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub leader_action: usize,
    pub follower_action: usize,
    pub realized_utility: f64,
}

/// A leader policy inside the round loop.
pub trait StrategySelector {
    fn select(&mut self, view: &RoundView<'_>) -> Result<Selection>;
    fn feedback(&mut self, view: &RoundView<'_>, selection: &Selection, feedback: &Feedback) -> Result<()>;
    fn snapshot(&self) -> Option<EngineSnapshot> {
        None
    }
}

/// Drives a [`LinearBandit`] over the round's vectors.
#[derive(Debug, Clone)]
pub struct BanditSelector<E>(pub E);

impl<E: LinearBandit> StrategySelector for BanditSelector<E> {
    fn select(&mut self, view: &RoundView<'_>) -> Result<Selection> {
        Ok(Selection::Menu(self.0.recommend(&view.actions.vectors)?))
    }

    fn feedback(&mut self, view: &RoundView<'_>, selection: &Selection, feedback: &Feedback) -> Result<()> {
        let Selection::Menu(i) = selection else {
            return Err(Error::ContractViolation("bandit selection left the menu".into()));
        };
        self.0.observe_utility(&view.actions.vectors[*i], feedback.realized_utility)
    }

    fn snapshot(&self) -> Option<EngineSnapshot> {
        self.0.snapshot()
    }
}

/// One logged round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub t: usize,
    pub context: Vec<f64>,
    pub chosen_index: Option<usize>,
    pub strategy: Vec<f64>,
    pub utility_vector: Vec<f64>,
    /// Absent when the round's action is not a sampled pure strategy.
    pub sampled_leader_action: Option<usize>,
    pub follower_type: usize,
    pub follower_action: Option<usize>,
    pub realized_utility: f64,
    /// `<u(z_t, x_t), w_t>` under the comparator weights.
    pub expected_utility: f64,
    /// `max_{x in E_t} <u(z_t, x), w_t>`.
    pub menu_best_utility: f64,
    pub menu_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_state: Option<EngineSnapshot>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub records: Vec<RoundRecord>,
}

impl EpisodeLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn cumulative_realized(&self) -> Vec<f64> {
        cumulative(self.records.iter().map(|r| r.realized_utility))
    }

    pub fn cumulative_expected(&self) -> Vec<f64> {
        cumulative(self.records.iter().map(|r| r.expected_utility))
    }
}

pub(crate) fn cumulative(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

fn step<S, R>(
    view: &RoundView<'_>,
    selector: &mut S,
    follower: usize,
    weights: &[f64],
    verbose: bool,
    rng: &mut R,
) -> Result<RoundRecord>
where
    S: StrategySelector + ?Sized,
    R: Rng + ?Sized,
{
    let selection = selector.select(view)?;
    let (chosen_index, strategy, utility_vector) = match &selection {
        Selection::Menu(i) => {
            let i = *i;
            if i >= view.actions.len() {
                return Err(Error::ContractViolation(format!(
                    "selected index {i} from a menu of {}",
                    view.actions.len()
                )));
            }
            (
                Some(i),
                view.actions.strategies[i].clone(),
                view.actions.utilities[i].clone(),
            )
        }
        Selection::OffMenu(x) => (None, x.clone(), view.at.utility_vector(x)?.values),
    };
    let leader_action = strategy.sample_with(rng.random::<f64>());
    let follower_action = view.at.best_response(&strategy, follower)?;
    let realized_utility = view.at.realized_utility(leader_action, follower_action)?;
    let feedback = Feedback {
        leader_action,
        follower_action,
        realized_utility,
    };
    selector.feedback(view, &selection, &feedback)?;
    Ok(RoundRecord {
        t: view.t + 1,
        context: view.context.as_slice().to_vec(),
        chosen_index,
        strategy: strategy.as_slice().to_vec(),
        expected_utility: dot(&utility_vector, weights),
        utility_vector,
        sampled_leader_action: Some(leader_action),
        follower_type: follower,
        follower_action: Some(follower_action),
        realized_utility,
        menu_best_utility: view.actions.best_weighted(weights),
        menu_size: view.actions.len(),
        engine_state: if verbose { selector.snapshot() } else { None },
    })
}

/// A single round against follower type `follower`, with an engine choosing
/// from `menu`. The comparator weights are the indicator of `follower`.
pub fn play_round<E, R>(
    game: &GameSpec,
    z: &Context,
    engine: &mut E,
    menu: &ExtremePointSet,
    mode: Mode,
    follower: usize,
    rng: &mut R,
) -> Result<RoundRecord>
where
    E: LinearBandit + ?Sized,
    R: Rng + ?Sized,
{
    struct Borrowed<'e, E: ?Sized>(&'e mut E);
    impl<E: LinearBandit + ?Sized> StrategySelector for Borrowed<'_, E> {
        fn select(&mut self, view: &RoundView<'_>) -> Result<Selection> {
            Ok(Selection::Menu(self.0.recommend(&view.actions.vectors)?))
        }
        fn feedback(&mut self, view: &RoundView<'_>, selection: &Selection, feedback: &Feedback) -> Result<()> {
            match selection {
                Selection::Menu(i) => self.0.observe_utility(&view.actions.vectors[*i], feedback.realized_utility),
                Selection::OffMenu(_) => Err(Error::ContractViolation("bandit selection left the menu".into())),
            }
        }
    }

    if follower >= game.types() {
        return Err(invalid(format!("follower type {follower} out of range")));
    }
    let at = game.at(z)?;
    let actions = build_at(&at, z, menu, mode)?;
    let view = RoundView {
        t: 0,
        game,
        context: z,
        at: &at,
        menu,
        actions: &actions,
    };
    let mut weights = vec![0.0; game.types()];
    weights[follower] = 1.0;
    step(&view, &mut Borrowed(engine), follower, &weights, false, rng)
}

/// Runs `selector` over every round of `trace`.
pub fn run_episode<S, R>(
    game: &GameSpec,
    trace: &EnvironmentTrace,
    selector: &mut S,
    mode: Mode,
    cache: &mut MenuCache,
    verbose: bool,
    rng: &mut R,
) -> Result<EpisodeLog>
where
    S: StrategySelector + ?Sized,
    R: Rng + ?Sized,
{
    trace.validate_for(game)?;
    let mut records = Vec::with_capacity(trace.len());
    for (t, (z, &follower)) in trace.contexts.iter().zip(&trace.followers).enumerate() {
        let at = game.at(z)?;
        let menu = cache.menu(&at)?;
        let actions = build_at(&at, z, &menu, mode)?;
        let view = RoundView {
            t,
            game,
            context: z,
            at: &at,
            menu: &menu,
            actions: &actions,
        };
        let weights = trace.comparator_weights(t, game.types());
        records.push(step(&view, selector, follower, &weights, verbose, rng)?);
    }
    Ok(EpisodeLog { records })
}
