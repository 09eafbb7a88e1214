//! Maps utility maximization over `[-1, 1]^K` onto loss minimization over the
//! unit ball, for engines that require both.

use super::{check_actions, LinearBandit, LossBandit};
use crate::error::{invalid, Error, Result};

/// Slack tolerated on the `[-1, 1]` entry bound.
const ENTRY_TOLERANCE: f64 = 1e-9;

/// Divides every action by `sqrt(K)` before handing it to the inner engine and
/// forwards the loss `-u / sqrt(K)`. The returned choice is an index into the
/// caller's original list.
#[derive(Debug, Clone)]
pub struct ScaledWrapper<L> {
    inner: L,
    dim: usize,
    sqrt_dim: f64,
}

impl<L: LossBandit> ScaledWrapper<L> {
    pub fn new(inner: L, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("wrapper dimension must be positive"));
        }
        Ok(Self {
            inner,
            dim,
            sqrt_dim: (dim as f64).sqrt(),
        })
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    pub fn scale(&self) -> f64 {
        self.sqrt_dim
    }

    fn shrink(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x / self.sqrt_dim).collect()
    }
}

impl<L: LossBandit> LinearBandit for ScaledWrapper<L> {
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize> {
        let n = check_actions(actions)?;
        if n != self.dim {
            return Err(invalid(format!("actions have dimension {n}, wrapper has {}", self.dim)));
        }
        if let Some(v) = actions.iter().flatten().find(|v| v.abs() > 1.0 + ENTRY_TOLERANCE) {
            return Err(invalid(format!("action entry {v} outside [-1, 1]")));
        }
        let scaled: Vec<Vec<f64>> = actions.iter().map(|v| self.shrink(v)).collect();
        let i = self.inner.recommend(&scaled)?;
        if i >= actions.len() {
            return Err(Error::ContractViolation(format!(
                "inner engine chose index {i} of {}",
                actions.len()
            )));
        }
        Ok(i)
    }

    fn observe_utility(&mut self, action: &[f64], utility: f64) -> Result<()> {
        if action.len() != self.dim {
            return Err(invalid("observed action has the wrong dimension"));
        }
        if !utility.is_finite() || utility.abs() > 1.0 + ENTRY_TOLERANCE {
            return Err(invalid(format!("utility {utility} outside [-1, 1]")));
        }
        let scaled = self.shrink(action);
        self.inner.observe_loss(&scaled, -utility / self.sqrt_dim)
    }
}
