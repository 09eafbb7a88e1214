//! Dense two-phase simplex for the small LPs in this crate.
//!
//! Problems are `max c.x` subject to linear rows and `x >= 0`. Pivoting follows
//! Bland's rule throughout (lowest-index entering column, lowest-index leaving
//! basic variable among ratio ties), so the returned optimal basis is a
//! deterministic function of the row and column order.

use crate::error::{Error, Result};

const EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    /// A program over `vars` nonnegative variables with a zero objective.
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            objective: vec![0.0; vars],
            rows: Vec::new(),
        }
    }

    pub fn maximize(mut self, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), self.vars);
        self.objective = c;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.vars);
        self.rows.push((coeffs, rel, rhs));
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self).run(&self.objective, self.vars)
    }
}

struct Tableau {
    // m rows of `cols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.vars;
        let mut normalized = Vec::with_capacity(lp.rows.len());
        for (a, rel, b) in &lp.rows {
            if *b < 0.0 {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((a.iter().map(|v| -v).collect::<Vec<_>>(), flipped, -b));
            } else {
                normalized.push((a.clone(), *rel, *b));
            }
        }
        let slacks = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let artificials = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let artificial_start = n + slacks;
        let cols = artificial_start + artificials;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut s, mut art) = (n, artificial_start);
        for (a, rel, b) in normalized {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&a);
            row[cols] = b;
            match rel {
                Relation::Le => {
                    row[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            cols,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in &mut self.rows[r] {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over the current basis, considering only columns
    /// below `allowed`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let reduced = |j: usize, rows: &[Vec<f64>], basis: &[usize]| -> f64 {
                cost[j]
                    - rows
                        .iter()
                        .zip(basis)
                        .map(|(row, &bv)| cost[bv] * row[j])
                        .sum::<f64>()
            };
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j, &self.rows, &self.basis) > EPS);
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[self.cols] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - EPS
                                || ((ratio - br).abs() <= EPS && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c);
        }
        Err(Error::Lp("exceeded the pivot limit".into()))
    }

    fn run(mut self, objective: &[f64], vars: usize) -> Result<LpOutcome> {
        if self.cols > self.artificial_start {
            let mut phase1 = vec![0.0; self.cols];
            for v in &mut phase1[self.artificial_start..] {
                *v = -1.0;
            }
            self.optimize(&phase1, self.cols)?;
            let infeasibility: f64 = self
                .rows
                .iter()
                .zip(&self.basis)
                .filter(|(_, &bv)| bv >= self.artificial_start)
                .map(|(row, _)| row[self.cols])
                .sum();
            if infeasibility > 1e-9 {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    match (0..self.artificial_start).find(|&j| self.rows[i][j].abs() > EPS) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..vars].copy_from_slice(objective);
        if !self.optimize(&cost, self.artificial_start)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; vars];
        for (row, &bv) in self.rows.iter().zip(&self.basis) {
            if bv < vars {
                x[bv] = row[self.cols].max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2).maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = lp.solve().unwrap().optimal().unwrap();
        assert!((v - 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max -x - y, x + y = 1, x >= 0.3
        let mut lp = LinearProgram::new(2).maximize(vec![-1.0, -2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constrain(vec![1.0, 0.0], Relation::Ge, 0.3);
        let (x, v) = lp.solve().unwrap().optimal().unwrap();
        assert!((v + 1.0).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1).maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        lp.constrain(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2).maximize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_equalities() {
        let mut lp = LinearProgram::new(2).maximize(vec![1.0, 1.0]);
        lp.constrain(vec![-1.0, -1.0], Relation::Ge, -3.0);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 4.0);
        let (_, v) = lp.solve().unwrap().optimal().unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
}
