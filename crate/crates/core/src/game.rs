//! Contextual Stackelberg game instances.
//!
//! Utilities are stored as linear forms in the context: the leader payoff of
//! `(a_l, a_f)` under context `z` is `<z, U(a_l, a_f)>`, and type `k`'s payoff is
//! `<z, U_k(a_l, a_f)>`. Tabular games are the `d = 1`, `z = (1)` special case.
//!
//! All indices are zero-based. Follower best responses break ties towards the
//! smallest action index among actions within [`TIE_TOLERANCE`] of the maximum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Two follower payoffs closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Slack allowed on the `[-1, 1]` utility range and on simplex sums.
pub const RANGE_TOLERANCE: f64 = 1e-9;

/// A context vector `z` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Context(Vec<f64>);

impl Context {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(invalid("context must have at least one coordinate"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(invalid("context entries must be finite"));
        }
        Ok(Self(z))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Bitwise key used for memoization on exact repeats.
    pub fn bit_key(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }
}

impl TryFrom<Vec<f64>> for Context {
    type Error = Error;
    fn try_from(z: Vec<f64>) -> Result<Self> {
        Self::new(z)
    }
}

impl From<Context> for Vec<f64> {
    fn from(c: Context) -> Self {
        c.0
    }
}

/// A point of the leader's simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    /// Validates and renormalizes. Entries down to `-RANGE_TOLERANCE` are
    /// clamped to zero; anything more negative is rejected, as is a sum that
    /// is off by more than `1e-6`.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(invalid("mixed strategy must be nonempty"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("mixed strategy entries must be finite"));
        }
        if let Some(v) = x.iter().find(|v| **v < -RANGE_TOLERANCE) {
            return Err(invalid(format!("negative probability {v}")));
        }
        let clamped: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(clamped.into_iter().map(|v| v / sum).collect()))
    }

    pub fn pure(n: usize, action: usize) -> Result<Self> {
        if action >= n {
            return Err(invalid(format!("pure action {action} out of range {n}")));
        }
        let mut x = vec![0.0; n];
        x[action] = 1.0;
        Ok(Self(x))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("mixed strategy must be nonempty"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse-CDF sampling of a pure action from a uniform draw in `[0, 1)`.
    pub fn sample_with(&self, uniform: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (a, p) in self.0.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            last = a;
            acc += p;
            if uniform < acc {
                return a;
            }
        }
        last
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;
    fn try_from(x: Vec<f64>) -> Result<Self> {
        Self::new(x)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(x: MixedStrategy) -> Self {
        x.0
    }
}

/// The vector `u(z, x)` of leader utilities against each follower type,
/// together with the strategy that induced it.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    pub values: Vec<f64>,
    pub strategy: MixedStrategy,
}

impl UtilityVector {
    /// `<u(z, x), w>` for a weight vector over types.
    pub fn weighted(&self, weights: &[f64]) -> f64 {
        dot(&self.values, weights)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A contextual Stackelberg game with `K` follower types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDocument", into = "GameDocument")]
pub struct GameSpec {
    d: usize,
    leader_actions: usize,
    follower_actions: usize,
    types: usize,
    // [a_l][a_f][j]
    leader: Vec<f64>,
    // [k][a_l][a_f][j]
    followers: Vec<f64>,
}

/// JSON layout of a [`GameSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameDocument {
    d: usize,
    #[serde(rename = "A_l")]
    a_l: usize,
    #[serde(rename = "A_f")]
    a_f: usize,
    #[serde(rename = "K")]
    k: usize,
    leader: Vec<Vec<Vec<f64>>>,
    followers: Vec<Vec<Vec<Vec<f64>>>>,
}

impl TryFrom<GameDocument> for GameSpec {
    type Error = Error;
    fn try_from(doc: GameDocument) -> Result<Self> {
        let shape_err = |what: &str| invalid(format!("{what} tensor has the wrong shape"));
        let mut leader = Vec::with_capacity(doc.a_l * doc.a_f * doc.d);
        if doc.leader.len() != doc.a_l {
            return Err(shape_err("leader"));
        }
        for row in &doc.leader {
            if row.len() != doc.a_f {
                return Err(shape_err("leader"));
            }
            for form in row {
                if form.len() != doc.d {
                    return Err(shape_err("leader"));
                }
                leader.extend_from_slice(form);
            }
        }
        let mut followers = Vec::with_capacity(doc.k * doc.a_l * doc.a_f * doc.d);
        if doc.followers.len() != doc.k {
            return Err(shape_err("follower"));
        }
        for ty in &doc.followers {
            if ty.len() != doc.a_l {
                return Err(shape_err("follower"));
            }
            for row in ty {
                if row.len() != doc.a_f {
                    return Err(shape_err("follower"));
                }
                for form in row {
                    if form.len() != doc.d {
                        return Err(shape_err("follower"));
                    }
                    followers.extend_from_slice(form);
                }
            }
        }
        GameSpec::new(doc.d, doc.a_l, doc.a_f, doc.k, leader, followers)
    }
}

impl From<GameSpec> for GameDocument {
    fn from(g: GameSpec) -> Self {
        let leader = (0..g.leader_actions)
            .map(|a| {
                (0..g.follower_actions)
                    .map(|b| g.leader_form(a, b).to_vec())
                    .collect()
            })
            .collect();
        let followers = (0..g.types)
            .map(|k| {
                (0..g.leader_actions)
                    .map(|a| {
                        (0..g.follower_actions)
                            .map(|b| g.follower_form(k, a, b).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        GameDocument {
            d: g.d,
            a_l: g.leader_actions,
            a_f: g.follower_actions,
            k: g.types,
            leader,
            followers,
        }
    }
}

impl GameSpec {
    /// Builds a game from flat tensors laid out `[a_l][a_f][j]` (leader) and
    /// `[k][a_l][a_f][j]` (followers).
    ///
    /// Every form must satisfy `||U||_1 <= 1`, which is exactly the condition
    /// that `|<z, U>| <= 1` for all contexts with `||z||_inf <= 1`.
    pub fn new(
        d: usize,
        leader_actions: usize,
        follower_actions: usize,
        types: usize,
        leader: Vec<f64>,
        followers: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 || types == 0 || follower_actions == 0 {
            return Err(invalid("need d >= 1, K >= 1 and A_f >= 1"));
        }
        if leader_actions < 2 {
            return Err(invalid("need A_l >= 2"));
        }
        if leader.len() != leader_actions * follower_actions * d {
            return Err(invalid("leader tensor has the wrong length"));
        }
        if followers.len() != types * leader_actions * follower_actions * d {
            return Err(invalid("follower tensor has the wrong length"));
        }
        if leader.iter().chain(&followers).any(|v| !v.is_finite()) {
            return Err(invalid("utility tensors must be finite"));
        }
        for (i, form) in leader.chunks(d).enumerate() {
            let norm: f64 = form.iter().map(|v| v.abs()).sum();
            if norm > 1.0 + RANGE_TOLERANCE {
                return Err(Error::OutOfRange(format!(
                    "leader form {i} has l1 norm {norm} > 1"
                )));
            }
        }
        for (i, form) in followers.chunks(d).enumerate() {
            let norm: f64 = form.iter().map(|v| v.abs()).sum();
            if norm > 1.0 + RANGE_TOLERANCE {
                return Err(Error::OutOfRange(format!(
                    "follower form {i} has l1 norm {norm} > 1"
                )));
            }
        }
        Ok(Self {
            d,
            leader_actions,
            follower_actions,
            types,
            leader,
            followers,
        })
    }

    /// Tabular game: `leader[a_l][a_f]` and `followers[k][a_l][a_f]`, stored as
    /// a `d = 1` game to be evaluated at `z = (1)`.
    pub fn tabular(leader: &[Vec<f64>], followers: &[Vec<Vec<f64>>]) -> Result<Self> {
        let a_l = leader.len();
        let a_f = leader.first().map_or(0, Vec::len);
        if leader.iter().any(|r| r.len() != a_f) {
            return Err(invalid("ragged leader matrix"));
        }
        let mut follower_flat = Vec::new();
        for m in followers {
            if m.len() != a_l || m.iter().any(|r| r.len() != a_f) {
                return Err(invalid("follower matrix shape differs from leader"));
            }
            follower_flat.extend(m.iter().flatten().copied());
        }
        Self::new(
            1,
            a_l,
            a_f,
            followers.len(),
            leader.iter().flatten().copied().collect(),
            follower_flat,
        )
    }

    pub fn context_dim(&self) -> usize {
        self.d
    }

    pub fn leader_actions(&self) -> usize {
        self.leader_actions
    }

    pub fn follower_actions(&self) -> usize {
        self.follower_actions
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn leader_form(&self, a_l: usize, a_f: usize) -> &[f64] {
        let start = (a_l * self.follower_actions + a_f) * self.d;
        &self.leader[start..start + self.d]
    }

    pub fn follower_form(&self, k: usize, a_l: usize, a_f: usize) -> &[f64] {
        let start = ((k * self.leader_actions + a_l) * self.follower_actions + a_f) * self.d;
        &self.followers[start..start + self.d]
    }

    /// Evaluates all payoff matrices at `z`.
    pub fn at(&self, z: &Context) -> Result<GameAtContext> {
        if z.dim() != self.d {
            return Err(invalid(format!(
                "context has dimension {}, game expects {}",
                z.dim(),
                self.d
            )));
        }
        let zs = z.as_slice();
        let leader = self.leader.chunks(self.d).map(|f| dot(f, zs)).collect();
        let followers = self.followers.chunks(self.d).map(|f| dot(f, zs)).collect();
        Ok(GameAtContext {
            leader_actions: self.leader_actions,
            follower_actions: self.follower_actions,
            types: self.types,
            leader,
            followers,
        })
    }

    pub fn follower_best_response(&self, z: &Context, x: &MixedStrategy, k: usize) -> Result<usize> {
        self.at(z)?.best_response(x, k)
    }

    pub fn leader_expected_utility(&self, z: &Context, x: &MixedStrategy, a_f: usize) -> Result<f64> {
        self.at(z)?.leader_expected_utility(x, a_f)
    }

    pub fn utility_vector(&self, z: &Context, x: &MixedStrategy) -> Result<UtilityVector> {
        self.at(z)?.utility_vector(x)
    }

    /// Bandit feedback: the leader's payoff for the sampled pure action.
    pub fn realized_round_utility(&self, z: &Context, a_l: usize, a_f: usize) -> Result<f64> {
        self.at(z)?.realized_utility(a_l, a_f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Payoff matrices of a game evaluated at one context.
#[derive(Debug, Clone, PartialEq)]
pub struct GameAtContext {
    leader_actions: usize,
    follower_actions: usize,
    types: usize,
    // [a_l][a_f]
    leader: Vec<f64>,
    // [k][a_l][a_f]
    followers: Vec<f64>,
}

impl GameAtContext {
    pub fn leader_actions(&self) -> usize {
        self.leader_actions
    }

    pub fn follower_actions(&self) -> usize {
        self.follower_actions
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn leader_payoff(&self, a_l: usize, a_f: usize) -> f64 {
        self.leader[a_l * self.follower_actions + a_f]
    }

    pub fn follower_payoff(&self, k: usize, a_l: usize, a_f: usize) -> f64 {
        self.followers[(k * self.leader_actions + a_l) * self.follower_actions + a_f]
    }

    /// Type `k`'s payoff matrix `[a_l][a_f]`.
    pub fn follower_matrix(&self, k: usize) -> &[f64] {
        let n = self.leader_actions * self.follower_actions;
        &self.followers[k * n..(k + 1) * n]
    }

    /// The leader matrix `[a_l][a_f]`.
    pub fn leader_matrix(&self) -> &[f64] {
        &self.leader
    }

    /// All follower matrices, concatenated.
    pub fn follower_matrices(&self) -> &[f64] {
        &self.followers
    }

    fn check_strategy(&self, x: &MixedStrategy) -> Result<()> {
        if x.len() != self.leader_actions {
            return Err(invalid(format!(
                "strategy has {} entries, game has {} leader actions",
                x.len(),
                self.leader_actions
            )));
        }
        Ok(())
    }

    /// `sum_a x[a] * u_k(z, a, a_f)`.
    pub fn follower_expected_utility(&self, x: &MixedStrategy, k: usize, a_f: usize) -> f64 {
        x.as_slice()
            .iter()
            .enumerate()
            .map(|(a, p)| p * self.follower_payoff(k, a, a_f))
            .sum()
    }

    pub fn best_response(&self, x: &MixedStrategy, k: usize) -> Result<usize> {
        if k >= self.types {
            return Err(invalid(format!("follower type {k} out of range {}", self.types)));
        }
        self.check_strategy(x)?;
        let values: Vec<f64> = (0..self.follower_actions)
            .map(|b| self.follower_expected_utility(x, k, b))
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(values
            .iter()
            .position(|v| *v >= best - TIE_TOLERANCE)
            .unwrap_or(0))
    }

    pub fn best_responses(&self, x: &MixedStrategy) -> Result<Vec<usize>> {
        (0..self.types).map(|k| self.best_response(x, k)).collect()
    }

    pub fn leader_expected_utility(&self, x: &MixedStrategy, a_f: usize) -> Result<f64> {
        self.check_strategy(x)?;
        if a_f >= self.follower_actions {
            return Err(invalid(format!("follower action {a_f} out of range")));
        }
        Ok(x.as_slice()
            .iter()
            .enumerate()
            .map(|(a, p)| p * self.leader_payoff(a, a_f))
            .sum())
    }

    pub fn utility_vector(&self, x: &MixedStrategy) -> Result<UtilityVector> {
        let values = (0..self.types)
            .map(|k| {
                let b = self.best_response(x, k)?;
                self.leader_expected_utility(x, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UtilityVector {
            values,
            strategy: x.clone(),
        })
    }

    pub fn realized_utility(&self, a_l: usize, a_f: usize) -> Result<f64> {
        if a_l >= self.leader_actions || a_f >= self.follower_actions {
            return Err(invalid(format!("action pair ({a_l}, {a_f}) out of range")));
        }
        Ok(self.leader_payoff(a_l, a_f))
    }
}
