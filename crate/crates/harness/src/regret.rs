//! Hindsight regret against the best context-to-menu-point policy.

use std::collections::HashMap;

use anyhow::{ensure, Result};
use ctxstack::markets::{application_action_set, Application, SimplexGrid};
use ctxstack::reduction::{EnvironmentTrace, EpisodeLog, MenuCache};
use ctxstack::GameSpec;
use serde::Serialize;

/// Cumulative series, all of length `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    /// Learner's expected utility under the comparator weights.
    pub cumulative_utility: Vec<f64>,
    pub cumulative_realized: Vec<f64>,
    pub cumulative_comparator: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn running(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Rounds sharing a context (bitwise) share one comparator choice: the
/// candidate maximizing the group's summed weighted utility. `candidates(t)`
/// returns the utility vectors available in round `t`; it is called once per
/// group of two or more rounds. A lone round reuses the menu-best utility
/// stored in its log record.
pub fn hindsight_regret<F>(trace: &EnvironmentTrace, log: &EpisodeLog, types: usize, mut candidates: F) -> Result<RegretReport>
where
    F: FnMut(usize) -> Result<Vec<Vec<f64>>>,
{
    ensure!(
        trace.len() == log.len(),
        "trace has {} rounds but the log has {}",
        trace.len(),
        log.len()
    );
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    for (t, z) in trace.contexts.iter().enumerate() {
        let g = *index.entry(z.bit_key()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(t);
    }
    let mut comparator = vec![0.0; trace.len()];
    for rounds in &groups {
        if let [t] = rounds[..] {
            comparator[t] = log.records[t].menu_best_utility;
            continue;
        }
        let options = candidates(rounds[0])?;
        ensure!(!options.is_empty(), "no comparator candidates in round {}", rounds[0] + 1);
        let weights: Vec<Vec<f64>> = rounds.iter().map(|&t| trace.comparator_weights(t, types)).collect();
        let mut best = 0;
        let mut best_total = f64::NEG_INFINITY;
        for (i, u) in options.iter().enumerate() {
            let total: f64 = weights.iter().map(|w| dot(u, w)).sum();
            if total > best_total {
                best = i;
                best_total = total;
            }
        }
        for (&t, w) in rounds.iter().zip(&weights) {
            comparator[t] = dot(&options[best], w);
        }
    }
    let cumulative_utility = log.cumulative_expected();
    let cumulative_comparator = running(comparator.into_iter());
    let cumulative_regret = cumulative_comparator
        .iter()
        .zip(&cumulative_utility)
        .map(|(c, u)| c - u)
        .collect();
    Ok(RegretReport {
        cumulative_realized: log.cumulative_realized(),
        cumulative_utility,
        cumulative_comparator,
        cumulative_regret,
    })
}

/// Regret of a game episode against the menus `E_z(δ)`.
pub fn game_regret(game: &GameSpec, trace: &EnvironmentTrace, log: &EpisodeLog, cache: &mut MenuCache) -> Result<RegretReport> {
    hindsight_regret(trace, log, game.types(), |t| {
        let at = game.at(&trace.contexts[t])?;
        let menu = cache.menu(&at)?;
        menu.strategies()
            .map(|x| Ok(at.utility_vector(x)?.values))
            .collect()
    })
}

/// Regret of an application episode against its policy grid.
pub fn application_regret<A: Application + ?Sized>(
    app: &A,
    grid: &SimplexGrid,
    trace: &EnvironmentTrace,
    log: &EpisodeLog,
) -> Result<RegretReport> {
    hindsight_regret(trace, log, app.types(), |t| {
        Ok(application_action_set(app, &trace.contexts[t], grid)?.vectors)
    })
}
