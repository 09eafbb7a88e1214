//! OFUL: ridge regression plus a self-normalized confidence ellipsoid.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{check_actions, EngineSnapshot, LinearBandit};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfulConfig {
    /// Ridge parameter `λ`.
    pub lambda: f64,
    /// Sub-Gaussian scale `R` of the reward noise.
    pub noise_scale: f64,
    /// Failure probability `δ` of the confidence set.
    pub confidence: f64,
    /// Bound `S` on the Euclidean norm of the unknown parameter.
    pub param_bound: f64,
}

impl Default for OfulConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            noise_scale: 4.0,
            confidence: 0.1,
            param_bound: 1.0,
        }
    }
}

/// Optimism in the face of uncertainty for linear rewards.
///
/// Plays `argmax <v, θ̂> + β_t ||v||_{V^{-1}}` with
/// `β_t = R sqrt(2 ln(1/δ) + n ln(1 + t / (λ n))) + sqrt(λ) S`.
#[derive(Debug, Clone)]
pub struct Oful {
    cfg: OfulConfig,
    dim: usize,
    gram: DMatrix<f64>,
    response: DVector<f64>,
    estimate: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
    rounds: u64,
}

impl Oful {
    pub fn new(dim: usize, cfg: OfulConfig) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("OFUL needs a positive dimension"));
        }
        if !(cfg.lambda > 0.0) || !(cfg.noise_scale >= 0.0) || !(cfg.param_bound >= 0.0) {
            return Err(invalid("OFUL needs lambda > 0, R >= 0, S >= 0"));
        }
        if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
            return Err(invalid("OFUL confidence must lie in (0, 1)"));
        }
        let gram = DMatrix::identity(dim, dim) * cfg.lambda;
        let factor = Cholesky::new(gram.clone()).expect("λI is positive definite");
        Ok(Self {
            cfg,
            dim,
            gram,
            response: DVector::zeros(dim),
            estimate: DVector::zeros(dim),
            factor,
            rounds: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn estimate(&self) -> &[f64] {
        self.estimate.as_slice()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `β_t` for the current round count.
    pub fn radius(&self) -> f64 {
        let n = self.dim as f64;
        let OfulConfig {
            lambda,
            noise_scale,
            confidence,
            param_bound,
        } = self.cfg;
        let log_term = 2.0 * (1.0 / confidence).ln() + n * (1.0 + self.rounds as f64 / (lambda * n)).ln();
        noise_scale * log_term.sqrt() + lambda.sqrt() * param_bound
    }

    /// `||v||_{V^{-1}}`.
    pub fn inverse_norm(&self, v: &[f64]) -> f64 {
        let y = self.factor.l().solve_lower_triangular(&DVector::from_column_slice(v));
        y.map_or(f64::INFINITY, |y| y.norm())
    }

    /// `||θ - θ̂||_V`.
    pub fn ellipsoid_distance(&self, theta: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(theta) - &self.estimate;
        (diff.transpose() * &self.gram * &diff)[(0, 0)].max(0.0).sqrt()
    }

    pub fn in_confidence_set(&self, theta: &[f64]) -> bool {
        self.ellipsoid_distance(theta) <= self.radius()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.gram
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn score(&self, v: &[f64]) -> f64 {
        let mean: f64 = self.estimate.iter().zip(v).map(|(a, b)| a * b).sum();
        mean + self.radius() * self.inverse_norm(v)
    }
}

impl LinearBandit for Oful {
    fn recommend(&mut self, actions: &[Vec<f64>]) -> Result<usize> {
        let n = check_actions(actions)?;
        if n != self.dim {
            return Err(invalid(format!("actions have dimension {n}, OFUL has {}", self.dim)));
        }
        let beta = self.radius();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, v) in actions.iter().enumerate() {
            let mean: f64 = self.estimate.iter().zip(v).map(|(a, b)| a * b).sum();
            let s = mean + beta * self.inverse_norm(v);
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        Ok(best)
    }

    fn observe_utility(&mut self, action: &[f64], utility: f64) -> Result<()> {
        if action.len() != self.dim {
            return Err(invalid("observed action has the wrong dimension"));
        }
        if !utility.is_finite() || action.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite observation"));
        }
        let v = DVector::from_column_slice(action);
        self.gram += &v * v.transpose();
        self.response += &v * utility;
        self.factor = Cholesky::new(self.gram.clone())
            .ok_or_else(|| Error::Lp("Gram matrix lost positive definiteness".into()))?;
        self.estimate = self.factor.solve(&self.response);
        self.rounds += 1;
        Ok(())
    }

    fn snapshot(&self) -> Option<EngineSnapshot> {
        Some(EngineSnapshot {
            estimate: self.estimate.as_slice().to_vec(),
            gram_diagonal: self.gram.diagonal().as_slice().to_vec(),
            radius: self.radius(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    }

    #[test]
    fn fresh_state_prefers_the_longer_action() {
        let mut o = Oful::new(2, OfulConfig::default()).unwrap();
        assert_eq!(o.recommend(&[e(2, 0, 1.0), e(2, 1, 0.5)]).unwrap(), 0);
        assert_eq!(o.recommend(&[e(2, 1, 0.5), e(2, 0, 1.0)]).unwrap(), 1);
        assert_eq!(o.recommend(&[vec![0.3, -0.2]]).unwrap(), 0);
        assert!(o.recommend(&[]).is_err());
        // equal scores keep list order
        assert_eq!(o.recommend(&[e(2, 0, 1.0), e(2, 1, 1.0)]).unwrap(), 0);
    }

    #[test]
    fn ridge_closed_form() {
        let mut o = Oful::new(2, OfulConfig::default()).unwrap();
        o.observe_utility(&e(2, 0, 1.0), 1.0).unwrap();
        assert!((o.estimate()[0] - 0.5).abs() < 1e-12 && o.estimate()[1].abs() < 1e-12);
        o.observe_utility(&e(2, 0, 1.0), 1.0).unwrap();
        assert!((o.estimate()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(o.rounds(), 2);
    }

    #[test]
    fn zero_action_only_advances_time() {
        let mut o = Oful::new(3, OfulConfig::default()).unwrap();
        o.observe_utility(&[0.2, 0.1, 0.0], 0.4).unwrap();
        let (g, th) = (o.gram().clone(), o.estimate().to_vec());
        o.observe_utility(&[0.0; 3], 0.9).unwrap();
        assert_eq!(o.gram(), &g);
        assert_eq!(o.estimate(), th.as_slice());
        assert_eq!(o.rounds(), 2);
        assert!(o.observe_utility(&[f64::NAN, 0.0, 0.0], 0.0).is_err());
        assert!(o.observe_utility(&[0.0; 3], f64::INFINITY).is_err());
    }

    #[test]
    fn estimate_recovers_a_linear_model() {
        let theta = [0.6, -0.2];
        let mut o = Oful::new(2, OfulConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let v = [angle.cos(), angle.sin()];
            let u = theta[0] * v[0] + theta[1] * v[1] + rng.random_range(-0.1..0.1);
            o.observe_utility(&v, u).unwrap();
        }
        let err = ((o.estimate()[0] - theta[0]).powi(2) + (o.estimate()[1] - theta[1]).powi(2)).sqrt();
        assert!(err <= 0.05, "error {err}");
        // θ̂ solves V θ̂ = b
        let residual = o.gram() * DVector::from_column_slice(o.estimate()) - &o.response;
        assert!(residual.amax() < 1e-9);
    }

    #[test]
    fn gram_eigenvalues_never_shrink() {
        let mut o = Oful::new(3, OfulConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut last = o.min_eigenvalue();
        assert!((last - 1.0).abs() < 1e-12);
        for _ in 0..100 {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            o.observe_utility(&v, rng.random_range(-1.0..1.0)).unwrap();
            let now = o.min_eigenvalue();
            assert!(now >= last - 1e-9);
            assert!(now >= 1.0 - 1e-9);
            last = now;
        }
    }

    #[test]
    fn radius_matches_formula() {
        let o = Oful::new(3, OfulConfig::default()).unwrap();
        let expected = 4.0 * (2.0 * 10f64.ln()).sqrt() + 1.0;
        assert!((o.radius() - expected).abs() < 1e-12);
        assert!(Oful::new(0, OfulConfig::default()).is_err());
        assert!(Oful::new(2, OfulConfig { confidence: 1.5, ..OfulConfig::default() }).is_err());
    }
}
