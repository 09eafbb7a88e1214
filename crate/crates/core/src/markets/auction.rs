//! Contextual second-price bidding against threshold vectors.
//!
//! Item `j` is won when `b[j] >= θ[j]` and costs `θ[j]`. Valuations are
//! additive with `v_j(z) = bias_j + <w_j, z>`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{dot, Context, RANGE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemValuation {
    pub bias: f64,
    pub weights: Vec<f64>,
}

impl ItemValuation {
    pub fn value(&self, z: &[f64]) -> f64 {
        self.bias + dot(&self.weights, z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AuctionDocument", into = "AuctionDocument")]
pub struct AuctionSpec {
    context_dim: usize,
    thresholds: Vec<Vec<f64>>,
    valuations: Vec<ItemValuation>,
}

#[derive(Serialize, Deserialize)]
struct AuctionDocument {
    d: usize,
    thresholds: Vec<Vec<f64>>,
    valuations: Vec<ItemValuation>,
}

impl TryFrom<AuctionDocument> for AuctionSpec {
    type Error = crate::Error;
    fn try_from(doc: AuctionDocument) -> Result<Self> {
        AuctionSpec::new(doc.d, doc.thresholds, doc.valuations)
    }
}

impl From<AuctionSpec> for AuctionDocument {
    fn from(s: AuctionSpec) -> Self {
        Self {
            d: s.context_dim,
            thresholds: s.thresholds,
            valuations: s.valuations,
        }
    }
}

impl AuctionSpec {
    /// Validates shapes, thresholds in `[0, 1]`, and the scale guard
    /// `sum_j max_i (|bias_j - θ_ij| + ||w_j||_1) <= 1`, which keeps every
    /// utility in `[-1, 1]` for contexts in `[-1, 1]^d`.
    pub fn new(context_dim: usize, thresholds: Vec<Vec<f64>>, valuations: Vec<ItemValuation>) -> Result<Self> {
        let m = valuations.len();
        if context_dim == 0 || m == 0 || thresholds.is_empty() {
            return Err(invalid("auction needs d >= 1, at least one item and one threshold vector"));
        }
        if let Some(v) = valuations.iter().find(|v| v.weights.len() != context_dim) {
            return Err(invalid(format!(
                "valuation weights have length {}, expected {context_dim}",
                v.weights.len()
            )));
        }
        for (i, th) in thresholds.iter().enumerate() {
            if th.len() != m {
                return Err(invalid(format!("threshold vector {i} has {} items, expected {m}", th.len())));
            }
            if th.iter().any(|t| !(0.0..=1.0).contains(t)) {
                return Err(invalid(format!("threshold vector {i} leaves [0, 1]")));
            }
        }
        if valuations
            .iter()
            .any(|v| !v.bias.is_finite() || v.weights.iter().any(|w| !w.is_finite()))
        {
            return Err(invalid("non-finite valuation coefficient"));
        }
        let spec = Self {
            context_dim,
            thresholds,
            valuations,
        };
        let bound = spec.utility_bound();
        if bound > 1.0 + RANGE_TOLERANCE {
            return Err(crate::Error::OutOfRange(format!(
                "auction utilities reach {bound} in magnitude"
            )));
        }
        Ok(spec)
    }

    /// Like [`AuctionSpec::new`], but scales thresholds and valuations by a
    /// common factor in `(0, 1]` when the scale guard would fail. Thresholds
    /// stay in `[0, 1]`.
    pub fn normalized(context_dim: usize, mut thresholds: Vec<Vec<f64>>, mut valuations: Vec<ItemValuation>) -> Result<Self> {
        if thresholds.iter().any(|t| t.len() != valuations.len()) {
            return Self::new(context_dim, thresholds, valuations);
        }
        let raw = Self {
            context_dim,
            thresholds: thresholds.clone(),
            valuations: valuations.clone(),
        };
        let bound = raw.utility_bound();
        if bound > 1.0 {
            for t in thresholds.iter_mut().flatten() {
                *t /= bound;
            }
            for v in &mut valuations {
                v.bias /= bound;
                for w in &mut v.weights {
                    *w /= bound;
                }
            }
        }
        Self::new(context_dim, thresholds, valuations)
    }

    /// Worst-case `|u|` over contexts in `[-1, 1]^d`.
    pub fn utility_bound(&self) -> f64 {
        self.valuations
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let spread: f64 = v.weights.iter().map(|w| w.abs()).sum();
                self.thresholds
                    .iter()
                    .map(|th| (v.bias - th[j]).abs() + spread)
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    pub fn items(&self) -> usize {
        self.valuations.len()
    }

    pub fn types(&self) -> usize {
        self.thresholds.len()
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn thresholds(&self) -> &[Vec<f64>] {
        &self.thresholds
    }

    pub fn valuations(&self) -> &[ItemValuation] {
        &self.valuations
    }

    pub fn values(&self, z: &Context) -> Vec<f64> {
        self.valuations.iter().map(|v| v.value(z.as_slice())).collect()
    }

    /// `sum_i ω[i] u(z, b, θ^(i))`.
    pub fn objective(&self, z: &Context, bid: &[f64], omega: &[f64]) -> f64 {
        let values = self.values(z);
        self.thresholds
            .iter()
            .zip(omega)
            .map(|(th, w)| w * outcome_with_values(&values, bid, th).1)
            .sum()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Won items and the leader's utility `sum_{j won} (v_j(z) - θ[j])`.
pub fn auction_outcome(spec: &AuctionSpec, z: &Context, bid: &[f64], threshold: &[f64]) -> (Vec<usize>, f64) {
    outcome_with_values(&spec.values(z), bid, threshold)
}

fn outcome_with_values(values: &[f64], bid: &[f64], threshold: &[f64]) -> (Vec<usize>, f64) {
    let won: Vec<usize> = (0..values.len()).filter(|&j| bid[j] >= threshold[j]).collect();
    let utility = won.iter().map(|&j| values[j] - threshold[j]).sum();
    (won, utility)
}

/// Candidate bids for item `j`: zero and every threshold, ascending.
pub fn candidate_bids(spec: &AuctionSpec, j: usize) -> Vec<f64> {
    let mut c: Vec<f64> = std::iter::once(0.0)
        .chain(spec.thresholds.iter().map(|th| th[j]))
        .collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// `argmax_b sum_i ω[i] u(z, b, θ^(i))`, solved item by item over the
/// candidate bids with ties going to the lowest bid.
pub fn auction_policy_bid(spec: &AuctionSpec, z: &Context, omega: &[f64]) -> Vec<f64> {
    let values = spec.values(z);
    (0..spec.items())
        .map(|j| {
            let item_value = |b: f64| -> f64 {
                spec.thresholds
                    .iter()
                    .zip(omega)
                    .filter(|(th, _)| b >= th[j])
                    .map(|(th, w)| w * (values[j] - th[j]))
                    .sum()
            };
            let mut best = (0.0, f64::NEG_INFINITY);
            for b in candidate_bids(spec, j) {
                let v = item_value(b);
                if v > best.1 {
                    best = (b, v);
                }
            }
            best.0
        })
        .collect()
}
