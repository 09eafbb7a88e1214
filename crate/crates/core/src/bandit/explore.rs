//! Fallback adversarial engine: forced exploration around a least-squares
//! loss estimate.
//!
//! This does not carry the regret guarantee of a log-determinant FTRL engine;
//! it is the default stand-in behind [`LossBandit`] until one is plugged in.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_actions, LossBandit};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplorationConfig {
    /// Ridge parameter of the loss estimate.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self { lambda: 1.0, seed: 0 }
    }
}

/// With probability `min(1, t^{-1/3})` plays uniformly over the action set,
/// otherwise the action minimizing the estimated loss (first index on ties).
#[derive(Debug, Clone)]
pub struct ForcedExploration {
    dim: usize,
    gram: DMatrix<f64>,
    response: DVector<f64>,
    estimate: DVector<f64>,
    rounds: u64,
    rng: ChaCha8Rng,
}

impl ForcedExploration {
    pub fn new(dim: usize, cfg: ExplorationConfig) -> Result<Self> {
        if dim == 0 || !(cfg.lambda > 0.0) {
            return Err(invalid("forced exploration needs dim > 0 and lambda > 0"));
        }
        Ok(Self {
            dim,
            gram: DMatrix::identity(dim, dim) * cfg.lambda,
            response: DVector::zeros(dim),
            estimate: DVector::zeros(dim),
            rounds: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    pub fn estimate(&self) -> &[f64] {
        self.estimate.as_slice()
    }

    pub fn exploration_probability(&self) -> f64 {
        let t = (self.rounds + 1) as f64;
        t.powf(-1.0 / 3.0).min(1.0)
    }
}

impl LossBandit for ForcedExploration {
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize> {
        let n = check_actions(actions)?;
        if n != self.dim {
            return Err(invalid("action dimension mismatch"));
        }
        if self.rng.random::<f64>() < self.exploration_probability() {
            return Ok(self.rng.random_range(0..actions.len()));
        }
        let mut best = 0;
        let mut best_loss = f64::INFINITY;
        for (i, v) in actions.iter().enumerate() {
            let l: f64 = self.estimate.iter().zip(v).map(|(a, b)| a * b).sum();
            if l < best_loss {
                best = i;
                best_loss = l;
            }
        }
        Ok(best)
    }

    fn observe_loss(&mut self, action: &[f64], loss: f64) -> Result<()> {
        if action.len() != self.dim || !loss.is_finite() {
            return Err(invalid("bad loss observation"));
        }
        let v = DVector::from_column_slice(action);
        self.gram += &v * v.transpose();
        self.response += &v * loss;
        self.estimate = self
            .gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Lp("loss Gram matrix is not positive definite".into()))?
            .solve(&self.response);
        self.rounds += 1;
        Ok(())
    }
}
