//! Feature map for learning with an unknown leader utility.
//!
//! With `U(a_l, a_f)` unknown, `E_{f~γ}[u(z, x, b_f(z, x))] = <h(z, x), θ(γ)>`
//! where `h` stacks `z[j] x[a_l] 1{a_f = b_i(z, x)}` over types, action pairs
//! and context coordinates, and `θ` stacks `U(a_l, a_f)[j] γ[i]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{Context, GameAtContext, GameSpec, MixedStrategy};

/// Index box of the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingDims {
    pub types: usize,
    pub leader_actions: usize,
    pub follower_actions: usize,
    pub context_dim: usize,
}

impl EmbeddingDims {
    pub fn of(game: &GameSpec) -> Self {
        Self {
            types: game.types(),
            leader_actions: game.leader_actions(),
            follower_actions: game.follower_actions(),
            context_dim: game.context_dim(),
        }
    }

    pub fn len(&self) -> usize {
        self.types * self.leader_actions * self.follower_actions * self.context_dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    // 0-based position, no checks
    fn offset(&self, i: usize, a_l: usize, a_f: usize, j: usize) -> usize {
        ((i * self.leader_actions + a_l) * self.follower_actions + a_f) * self.context_dim + j
    }
}

/// `n(i, a_l, a_f, j) = (i-1) A_l A_f d + (a_l-1) A_f d + (a_f-1) d + j`, all
/// arguments and the result 1-based.
pub fn flat_index(i: usize, a_l: usize, a_f: usize, j: usize, dims: EmbeddingDims) -> Result<usize> {
    let within = |v: usize, hi: usize| (1..=hi).contains(&v);
    if !(within(i, dims.types)
        && within(a_l, dims.leader_actions)
        && within(a_f, dims.follower_actions)
        && within(j, dims.context_dim))
    {
        return Err(invalid(format!(
            "index ({i}, {a_l}, {a_f}, {j}) outside box {dims:?}"
        )));
    }
    Ok(dims.offset(i - 1, a_l - 1, a_f - 1, j - 1) + 1)
}

/// `h(z, x)` from an already evaluated game.
pub fn h_embedding_at(at: &GameAtContext, z: &Context, x: &MixedStrategy) -> Result<Vec<f64>> {
    let dims = EmbeddingDims {
        types: at.types(),
        leader_actions: at.leader_actions(),
        follower_actions: at.follower_actions(),
        context_dim: z.dim(),
    };
    let responses = at.best_responses(x)?;
    let mut h = vec![0.0; dims.len()];
    for (i, &b) in responses.iter().enumerate() {
        for (a_l, &p) in x.as_slice().iter().enumerate() {
            for (j, &zj) in z.as_slice().iter().enumerate() {
                h[dims.offset(i, a_l, b, j)] = zj * p;
            }
        }
    }
    Ok(h)
}

pub fn h_embedding(game: &GameSpec, z: &Context, x: &MixedStrategy) -> Result<Vec<f64>> {
    h_embedding_at(&game.at(z)?, z, x)
}

/// `θ(γ)` with `θ[n(i, a_l, a_f, j)] = U(a_l, a_f)[j] γ[i]`.
pub fn embedding_parameter(game: &GameSpec, gamma: &[f64]) -> Result<Vec<f64>> {
    let dims = EmbeddingDims::of(game);
    if gamma.len() != dims.types {
        return Err(invalid(format!(
            "type mixture has {} entries, game has {} types",
            gamma.len(),
            dims.types
        )));
    }
    let mut theta = vec![0.0; dims.len()];
    for (i, &g) in gamma.iter().enumerate() {
        for a_l in 0..dims.leader_actions {
            for a_f in 0..dims.follower_actions {
                for (j, &u) in game.leader_form(a_l, a_f).iter().enumerate() {
                    theta[dims.offset(i, a_l, a_f, j)] = u * g;
                }
            }
        }
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::{g0, one};

    fn dims(k: usize, al: usize, af: usize, d: usize) -> EmbeddingDims {
        EmbeddingDims {
            types: k,
            leader_actions: al,
            follower_actions: af,
            context_dim: d,
        }
    }

    #[test]
    fn index_arithmetic() {
        assert_eq!(flat_index(1, 1, 1, 1, dims(3, 4, 5, 6)).unwrap(), 1);
        assert_eq!(flat_index(2, 1, 1, 1, dims(2, 2, 2, 3)).unwrap(), 13);
        assert!(flat_index(0, 1, 1, 1, dims(2, 2, 2, 3)).is_err());
        assert!(flat_index(1, 1, 3, 1, dims(2, 2, 2, 3)).is_err());
    }

    #[test]
    fn index_is_a_bijection() {
        let d = dims(2, 2, 2, 3);
        let mut seen = vec![0; d.len() + 1];
        for i in 1..=2 {
            for a in 1..=2 {
                for b in 1..=2 {
                    for j in 1..=3 {
                        seen[flat_index(i, a, b, j, d).unwrap()] += 1;
                    }
                }
            }
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1..].iter().all(|&c| c == 1));
    }

    #[test]
    fn g0_pattern() {
        let x = MixedStrategy::new(vec![0.7, 0.3]).unwrap();
        let h = h_embedding(&g0(), &one(), &x).unwrap();
        let d = dims(1, 2, 2, 1);
        let mut expected = vec![0.0; 4];
        expected[flat_index(1, 1, 1, 1, d).unwrap() - 1] = 0.7;
        expected[flat_index(1, 2, 1, 1, d).unwrap() - 1] = 0.3;
        assert_eq!(h, expected);
    }

    #[test]
    fn identity_on_g0() {
        let game = g0();
        let theta = embedding_parameter(&game, &[1.0]).unwrap();
        for p in [0.0, 0.3, 0.5, 0.8, 1.0] {
            let x = MixedStrategy::new(vec![p, 1.0 - p]).unwrap();
            let h = h_embedding(&game, &one(), &x).unwrap();
            let lhs: f64 = h.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let u = game.utility_vector(&one(), &x).unwrap().values[0];
            assert!((lhs - u).abs() < 1e-12);
        }
        assert!(embedding_parameter(&game, &[0.5, 0.5]).is_err());
    }
}
