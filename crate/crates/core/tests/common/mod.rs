#![allow(dead_code)]

use ctxstack::{Context, GameSpec, MixedStrategy};
use rand::Rng;

pub fn uniform_pm1<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>() * 2.0 - 1.0
}

/// Forms scaled so each has l1 norm at most one.
fn forms<R: Rng>(rng: &mut R, count: usize, d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count * d);
    for _ in 0..count {
        let form: Vec<f64> = (0..d).map(|_| uniform_pm1(rng)).collect();
        let norm: f64 = form.iter().map(|v| v.abs()).sum();
        let s = if norm > 1.0 { norm } else { 1.0 };
        out.extend(form.iter().map(|v| v / s));
    }
    out
}

pub fn random_game<R: Rng>(rng: &mut R, d: usize, types: usize, a_l: usize, a_f: usize) -> GameSpec {
    let leader = forms(rng, a_l * a_f, d);
    let followers = forms(rng, types * a_l * a_f, d);
    GameSpec::new(d, a_l, a_f, types, leader, followers).unwrap()
}

pub fn random_context<R: Rng>(rng: &mut R, d: usize) -> Context {
    Context::new((0..d).map(|_| uniform_pm1(rng)).collect()).unwrap()
}

/// Uniform point of the simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn random_strategy<R: Rng>(rng: &mut R, n: usize) -> MixedStrategy {
    MixedStrategy::new(random_simplex(rng, n)).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Leader payoff from the raw forms, best response chosen directly from the
/// follower forms with lowest-index tie breaking.
pub fn oracle_leader_utility(game: &GameSpec, z: &Context, x: &[f64], k: usize) -> f64 {
    let z = z.as_slice();
    let follower_value = |a_f: usize| -> f64 {
        (0..game.leader_actions())
            .map(|a_l| x[a_l] * dot(game.follower_form(k, a_l, a_f), z))
            .sum()
    };
    let values: Vec<f64> = (0..game.follower_actions()).map(follower_value).collect();
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b = values.iter().position(|v| *v >= top - 1e-9).unwrap();
    (0..game.leader_actions())
        .map(|a_l| x[a_l] * dot(game.leader_form(a_l, b), z))
        .sum()
}
