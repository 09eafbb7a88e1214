//! Auctions and persuasion as contextual learning problems over a finite
//! policy grid.
//!
//! Each grid point `ω` is a belief over the `K` opponent types. Its policy is
//! the best response to that belief at the current context, and the engine
//! learns over the `K`-vectors of utilities those policies earn.

mod auction;
mod grid;
mod persuasion;

pub use auction::{auction_outcome, auction_policy_bid, candidate_bids, AuctionSpec, ItemValuation};
pub use grid::{grid_size, simplex_grid, SimplexGrid};
pub use persuasion::{persuasion_policy_signal, PersuasionSpec};

use crate::bandit::LinearBandit;
use crate::error::{invalid, Error, Result};
use crate::game::{dot, Context};
use crate::polytope::{sup_distance, DEDUP_TOLERANCE};
use crate::reduction::{EnvironmentTrace, EpisodeLog, RoundRecord};

/// A setting where the leader picks an action vector and earns a known
/// utility against each of `K` types.
pub trait Application {
    fn types(&self) -> usize;
    fn context_dim(&self) -> usize;
    /// The action that is optimal against the type mixture `omega`.
    fn policy(&self, z: &Context, omega: &[f64]) -> Result<Vec<f64>>;
    /// Utility of `action` against each type.
    fn utilities(&self, z: &Context, action: &[f64]) -> Vec<f64>;
}

impl Application for AuctionSpec {
    fn types(&self) -> usize {
        AuctionSpec::types(self)
    }

    fn context_dim(&self) -> usize {
        AuctionSpec::context_dim(self)
    }

    fn policy(&self, z: &Context, omega: &[f64]) -> Result<Vec<f64>> {
        Ok(auction_policy_bid(self, z, omega))
    }

    fn utilities(&self, z: &Context, action: &[f64]) -> Vec<f64> {
        self.thresholds()
            .iter()
            .map(|th| auction_outcome(self, z, action, th).1)
            .collect()
    }
}

impl Application for PersuasionSpec {
    fn types(&self) -> usize {
        PersuasionSpec::types(self)
    }

    fn context_dim(&self) -> usize {
        PersuasionSpec::context_dim(self)
    }

    fn policy(&self, z: &Context, omega: &[f64]) -> Result<Vec<f64>> {
        persuasion_policy_signal(self, z, omega)
    }

    fn utilities(&self, z: &Context, action: &[f64]) -> Vec<f64> {
        (0..PersuasionSpec::types(self)).map(|i| self.utility(z, action, i)).collect()
    }
}

/// Distinct policy actions of one round with their utility vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationActionSet {
    pub actions: Vec<Vec<f64>>,
    /// First grid point producing each action.
    pub grid_index: Vec<usize>,
    pub vectors: Vec<Vec<f64>>,
}

impl ApplicationActionSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

pub fn application_action_set<A: Application + ?Sized>(
    app: &A,
    z: &Context,
    grid: &SimplexGrid,
) -> Result<ApplicationActionSet> {
    if grid.is_empty() {
        return Err(invalid("empty policy grid"));
    }
    if grid.parts() != app.types() {
        return Err(invalid(format!(
            "grid over {} types for a setting with {}",
            grid.parts(),
            app.types()
        )));
    }
    let mut set = ApplicationActionSet {
        actions: Vec::new(),
        grid_index: Vec::new(),
        vectors: Vec::new(),
    };
    for (g, omega) in grid.points().enumerate() {
        let action = app.policy(z, &omega)?;
        if set
            .actions
            .iter()
            .any(|a| sup_distance(a, &action) <= DEDUP_TOLERANCE)
        {
            continue;
        }
        set.vectors.push(app.utilities(z, &action));
        set.actions.push(action);
        set.grid_index.push(g);
    }
    Ok(set)
}

/// The learning loop for an application: the engine picks among the round's
/// policy actions and observes the utility against the served type.
pub fn run_application_episode<A, E>(
    app: &A,
    grid: &SimplexGrid,
    trace: &EnvironmentTrace,
    engine: &mut E,
    verbose: bool,
) -> Result<EpisodeLog>
where
    A: Application + ?Sized,
    E: LinearBandit + ?Sized,
{
    trace.validate_dims(app.context_dim(), app.types())?;
    let mut records = Vec::with_capacity(trace.len());
    for (t, (z, &follower)) in trace.contexts.iter().zip(&trace.followers).enumerate() {
        let set = application_action_set(app, z, grid)?;
        let i = engine.recommend(&set.vectors)?;
        if i >= set.len() {
            return Err(Error::ContractViolation(format!(
                "selected index {i} from {} actions",
                set.len()
            )));
        }
        let realized = set.vectors[i][follower];
        engine.observe_utility(&set.vectors[i], realized)?;
        let weights = trace.comparator_weights(t, app.types());
        let best = set
            .vectors
            .iter()
            .map(|v| dot(v, &weights))
            .fold(f64::NEG_INFINITY, f64::max);
        records.push(RoundRecord {
            t: t + 1,
            context: z.as_slice().to_vec(),
            chosen_index: Some(i),
            strategy: set.actions[i].clone(),
            utility_vector: set.vectors[i].clone(),
            sampled_leader_action: None,
            follower_type: follower,
            follower_action: None,
            realized_utility: realized,
            expected_utility: dot(&set.vectors[i], &weights),
            menu_best_utility: best,
            menu_size: set.len(),
            engine_state: if verbose { engine.snapshot() } else { None },
        });
    }
    Ok(EpisodeLog { records })
}
