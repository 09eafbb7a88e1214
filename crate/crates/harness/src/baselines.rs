//! Comparison policies: uniformly random commitments and explore-then-commit.

use std::collections::BTreeMap;

use ctxstack::reduction::{Feedback, RoundView, Selection, StrategySelector};
use ctxstack::Result;
use rand_chacha::ChaCha8Rng;

use crate::generate::random_strategy;

/// Commits to a fresh uniformly random mixed strategy every round.
pub struct RandomBaseline {
    rng: ChaCha8Rng,
}

impl RandomBaseline {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng }
    }
}

impl StrategySelector for RandomBaseline {
    fn select(&mut self, view: &RoundView<'_>) -> Result<Selection> {
        Ok(Selection::OffMenu(random_strategy(&mut self.rng, view.at.leader_actions())))
    }

    fn feedback(&mut self, _: &RoundView<'_>, _: &Selection, _: &Feedback) -> Result<()> {
        Ok(())
    }
}

const EM_ITERATIONS: usize = 2_000;
const EM_TOLERANCE: f64 = 1e-12;

/// Explore-then-commit.
///
/// For the first `explore_rounds` rounds it cycles through the menu and
/// records which follower types are consistent with each observed best
/// response. It then fixes the maximum-likelihood type distribution over those
/// set-valued observations and plays the menu point maximizing expected
/// utility under it.
///
/// This is a reconstruction of a baseline known only from a short
/// description; its exploration set is the whole menu.
pub struct ExploreThenCommit {
    explore_rounds: usize,
    types: usize,
    // consistent-type mask -> count
    observations: BTreeMap<Vec<bool>, usize>,
    estimate: Option<Vec<f64>>,
}

impl ExploreThenCommit {
    pub fn new(explore_rounds: usize, types: usize) -> Self {
        Self {
            explore_rounds,
            types,
            observations: BTreeMap::new(),
            estimate: None,
        }
    }

    pub fn explore_rounds(&self) -> usize {
        self.explore_rounds
    }

    /// The type distribution estimate, fixed once exploration ends.
    pub fn estimate(&mut self) -> &[f64] {
        if self.estimate.is_none() {
            self.estimate = Some(self.maximum_likelihood());
        }
        self.estimate.as_deref().unwrap()
    }

    /// EM for a categorical distribution observed through subsets.
    fn maximum_likelihood(&self) -> Vec<f64> {
        let k = self.types;
        let mut p = vec![1.0 / k as f64; k];
        let total: usize = self.observations.values().sum();
        if total == 0 {
            return p;
        }
        for _ in 0..EM_ITERATIONS {
            let mut next = vec![0.0; k];
            for (mask, &count) in &self.observations {
                let mass: f64 = (0..k).filter(|&i| mask[i]).map(|i| p[i]).sum();
                if mass <= 0.0 {
                    continue;
                }
                for i in (0..k).filter(|&i| mask[i]) {
                    next[i] += count as f64 * p[i] / mass;
                }
            }
            let norm: f64 = next.iter().sum();
            next.iter_mut().for_each(|v| *v /= norm);
            let change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            p = next;
            if change < EM_TOLERANCE {
                break;
            }
        }
        p
    }
}

impl StrategySelector for ExploreThenCommit {
    fn select(&mut self, view: &RoundView<'_>) -> Result<Selection> {
        let n = view.actions.len();
        if view.t < self.explore_rounds {
            return Ok(Selection::Menu(view.t % n));
        }
        let p = self.estimate().to_vec();
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, u) in view.actions.utilities.iter().enumerate() {
            let v: f64 = u.iter().zip(&p).map(|(a, b)| a * b).sum();
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        Ok(Selection::Menu(best))
    }

    fn feedback(&mut self, view: &RoundView<'_>, selection: &Selection, feedback: &Feedback) -> Result<()> {
        if view.t >= self.explore_rounds {
            return Ok(());
        }
        let Selection::Menu(i) = selection else {
            return Ok(());
        };
        let x = &view.actions.strategies[*i];
        let mask = (0..self.types)
            .map(|k| Ok(view.at.best_response(x, k)? == feedback.follower_action))
            .collect::<Result<Vec<bool>>>()?;
        *self.observations.entry(mask).or_insert(0) += 1;
        Ok(())
    }
}
