//! Brute-force vertex enumeration for small H-polytopes.

use crate::linalg::solve_square;

/// Feasibility slack when accepting a basic solution as a vertex.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Two vertices closer than this in the sup norm are the same vertex.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// A row `normal . x >= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Row {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

/// Iterates `k`-subsets of `0..n` in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

pub(crate) fn push_unique(points: &mut Vec<Vec<f64>>, x: Vec<f64>) -> bool {
    if points.iter().any(|p| sup_distance(p, &x) <= DEDUP_TOLERANCE) {
        return false;
    }
    points.push(x);
    true
}

/// All vertices of `{x in R^dim : ineqs >= , eqs ==}`.
///
/// Every choice of `dim - eqs.len()` inequality rows is made active together
/// with all equalities; nonsingular systems whose solution satisfies every row
/// within [`FEASIBILITY_TOLERANCE`] are kept, deduplicated in enumeration order.
/// Unbounded directions are not detected; callers pass bounded systems.
pub fn enumerate_vertices(dim: usize, ineqs: &[Row], eqs: &[Row]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if eqs.len() > dim {
        return out;
    }
    let free = dim - eqs.len();
    for active in Combinations::new(ineqs.len(), free) {
        let mut a = Vec::with_capacity(dim * dim);
        let mut b = Vec::with_capacity(dim);
        for row in eqs.iter().chain(active.iter().map(|&i| &ineqs[i])) {
            a.extend_from_slice(&row.normal);
            b.push(row.offset);
        }
        let Some(x) = solve_square(a, b, dim) else {
            continue;
        };
        let feasible = ineqs
            .iter()
            .all(|r| r.slack(&x) >= -FEASIBILITY_TOLERANCE)
            && eqs.iter().all(|r| r.slack(&x).abs() <= FEASIBILITY_TOLERANCE);
        if feasible {
            push_unique(&mut out, x);
        }
    }
    out
}
