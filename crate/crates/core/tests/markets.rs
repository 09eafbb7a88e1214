mod common;

use common::*;
use ctxstack::markets::{auction_policy_bid, candidate_bids, persuasion_policy_signal, AuctionSpec, ItemValuation, PersuasionSpec};
use ctxstack::Context;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_auction<R: Rng>(rng: &mut R, d: usize, types: usize, items: usize) -> AuctionSpec {
    let thresholds = (0..types)
        .map(|_| (0..items).map(|_| rng.random::<f64>()).collect())
        .collect();
    let valuations = (0..items)
        .map(|_| ItemValuation {
            bias: rng.random::<f64>(),
            weights: (0..d).map(|_| 0.3 * uniform_pm1(rng)).collect(),
        })
        .collect();
    AuctionSpec::normalized(d, thresholds, valuations).unwrap()
}

/// `sum_i ω_i sum_{j : b_j >= θ_ij} (v_j(z) - θ_ij)` from the raw spec.
fn oracle_objective(spec: &AuctionSpec, z: &Context, bid: &[f64], omega: &[f64]) -> f64 {
    let values: Vec<f64> = spec.valuations().iter().map(|v| v.value(z.as_slice())).collect();
    spec.thresholds()
        .iter()
        .zip(omega)
        .map(|(th, w)| {
            w * (0..bid.len())
                .filter(|&j| bid[j] >= th[j])
                .map(|j| values[j] - th[j])
                .sum::<f64>()
        })
        .sum()
}

/// Every joint bid on the per-item candidate grid.
fn exhaustive_best(spec: &AuctionSpec, z: &Context, omega: &[f64]) -> f64 {
    let grids: Vec<Vec<f64>> = (0..spec.items()).map(|j| candidate_bids(spec, j)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; grids.len()];
    loop {
        let bid: Vec<f64> = idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect();
        best = best.max(oracle_objective(spec, z, &bid, omega));
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < grids[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            return best;
        }
    }
}

proptest! {
    #[test]
    fn auction_bid_is_exhaustively_optimal(
        seed in any::<u64>(),
        items in 1usize..=3,
        types in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_auction(&mut rng, 2, types, items);
        let z = random_context(&mut rng, 2);
        let omega = random_simplex(&mut rng, types);
        let bid = auction_policy_bid(&spec, &z, &omega);
        let value = oracle_objective(&spec, &z, &bid, &omega);
        prop_assert!((value - exhaustive_best(&spec, &z, &omega)).abs() <= 1e-12);
        for _ in 0..500 {
            let random: Vec<f64> = (0..items).map(|_| rng.random::<f64>()).collect();
            prop_assert!(oracle_objective(&spec, &z, &random, &omega) <= value + 1e-9);
        }
    }

    #[test]
    fn raising_a_bid_never_loses_items(
        seed in any::<u64>(),
        items in 1usize..=3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_auction(&mut rng, 2, 3, items);
        let z = random_context(&mut rng, 2);
        let low: Vec<f64> = (0..items).map(|_| rng.random::<f64>()).collect();
        let high: Vec<f64> = low.iter().map(|b| b + rng.random::<f64>() * (1.0 - b)).collect();
        for th in spec.thresholds() {
            let (won_low, _) = ctxstack::markets::auction_outcome(&spec, &z, &low, th);
            let (won_high, _) = ctxstack::markets::auction_outcome(&spec, &z, &high, th);
            prop_assert!(won_low.iter().all(|j| won_high.contains(j)));
        }
    }
}

/// A box `[-1, 1]^p` cut by random halfspaces that keep the origin feasible.
fn random_persuasion<R: Rng>(rng: &mut R, d: usize, p: usize, types: usize, cuts: usize) -> PersuasionSpec {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for l in 0..p {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; p];
            r[l] = s;
            rows.push(r);
            rhs.push(1.0);
        }
    }
    for _ in 0..cuts {
        rows.push((0..p).map(|_| uniform_pm1(rng)).collect());
        rhs.push(0.2 + 0.8 * rng.random::<f64>());
    }
    let c = (0..types)
        .map(|_| (0..d).map(|_| (0..p).map(|_| uniform_pm1(rng)).collect()).collect())
        .collect();
    PersuasionSpec::normalized(d, p, rows, rhs, c).unwrap()
}

/// Solves the square system by Gaussian elimination; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n)
        .flat_map(|first| {
            combinations(n - first - 1, k - 1)
                .into_iter()
                .map(move |rest| std::iter::once(first).chain(rest.into_iter().map(|r| r + first + 1)).collect())
        })
        .collect()
}

/// Best objective over all basic feasible solutions.
fn brute_force_max(spec: &PersuasionSpec, objective: &[f64]) -> f64 {
    let (rows, rhs) = spec.rows();
    let p = spec.signal_dim();
    let mut best = f64::NEG_INFINITY;
    for set in combinations(rows.len(), p) {
        let a = set.iter().map(|&i| rows[i].clone()).collect();
        let b = set.iter().map(|&i| rhs[i]).collect();
        if let Some(mu) = solve(a, b) {
            if spec.contains(&mu, 1e-9) {
                best = best.max(mu.iter().zip(objective).map(|(x, c)| x * c).sum());
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn persuasion_lp_matches_vertex_enumeration(
        seed in any::<u64>(),
        p in 1usize..=4,
        types in 1usize..=3,
        cuts in 0usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_persuasion(&mut rng, 2, p, types, cuts);
        let z = random_context(&mut rng, 2);
        let omega = random_simplex(&mut rng, types);
        let mu = persuasion_policy_signal(&spec, &z, &omega).unwrap();
        prop_assert!(spec.contains(&mu, 1e-9));
        let mut objective = vec![0.0; p];
        for (i, w) in omega.iter().enumerate() {
            for (o, c) in objective.iter_mut().zip(spec.coefficients(&z, i)) {
                *o += w * c;
            }
        }
        let value: f64 = mu.iter().zip(&objective).map(|(x, c)| x * c).sum();
        prop_assert!((value - brute_force_max(&spec, &objective)).abs() <= 1e-9);
    }
}
