//! Regret minimizers plugged into the reduction loop.
//!
//! Engines receive the round's finite action set and answer with the *index*
//! of their choice, so the caller can map the choice back to the strategy that
//! induced it without any numerical inversion. Callers alternate
//! `recommend` and `observe_*` once per round.

mod explore;
mod oful;
mod scaled;

pub use explore::{ExplorationConfig, ForcedExploration};
pub use oful::{Oful, OfulConfig};
pub use scaled::ScaledWrapper;

use serde::Serialize;

use crate::error::Result;

/// A utility-maximizing linear bandit.
pub trait LinearBandit {
    /// Picks one of `actions`, returning its index.
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize>;

    /// Feeds back the realized utility (in `[-1, 1]`) of the chosen vector.
    fn observe_utility(&mut self, action: &[f64], utility: f64) -> Result<()>;

    /// Per-round state summary for verbose logs.
    fn snapshot(&self) -> Option<EngineSnapshot> {
        None
    }
}

/// A loss-minimizing linear bandit over actions in the unit ball.
pub trait LossBandit {
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize>;
    fn observe_loss(&mut self, action: &[f64], loss: f64) -> Result<()>;
}

impl<B: LinearBandit + ?Sized> LinearBandit for Box<B> {
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize> {
        (**self).recommend(actions)
    }
    fn observe_utility(&mut self, action: &[f64], utility: f64) -> Result<()> {
        (**self).observe_utility(action, utility)
    }
    fn snapshot(&self) -> Option<EngineSnapshot> {
        (**self).snapshot()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSnapshot {
    pub estimate: Vec<f64>,
    pub gram_diagonal: Vec<f64>,
    pub radius: f64,
}

pub(crate) fn check_actions(actions: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = actions.first() else {
        return Err(crate::error::invalid("empty action set"));
    };
    let n = first.len();
    if actions.iter().any(|a| a.len() != n) {
        return Err(crate::error::invalid("action vectors differ in length"));
    }
    if actions.iter().flatten().any(|v| !v.is_finite()) {
        return Err(crate::error::invalid("non-finite action entry"));
    }
    Ok(n)
}
