use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// All `ω` in the simplex over `K` coordinates with `N ω[i]` integral,
/// stored as integer numerators over `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimplexGrid {
    granularity: u32,
    numerators: Vec<Vec<u32>>,
}

/// `C(N + K - 1, K - 1)`, saturating at `u128::MAX`.
pub fn grid_size(parts: usize, granularity: u32) -> u128 {
    let n = granularity as u128;
    let k = parts as u128 - 1;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n + i) / i stays integral at each step
        acc = match acc.checked_mul(n + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

impl SimplexGrid {
    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    pub fn parts(&self) -> usize {
        self.numerators.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn numerators(&self) -> &[Vec<u32>] {
        &self.numerators
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let n = self.granularity as f64;
        self.numerators[i].iter().map(|&c| c as f64 / n).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Enumerates the grid, refusing when it would exceed `cap` points.
pub fn simplex_grid(parts: usize, granularity: u32, cap: usize) -> Result<SimplexGrid> {
    if parts == 0 || granularity == 0 {
        return Err(invalid("grid needs K >= 1 and N >= 1"));
    }
    let count = grid_size(parts, granularity);
    if count > cap as u128 {
        return Err(Error::CapExceeded {
            what: format!("simplex grid K={parts}, N={granularity}"),
            count,
            cap: cap as u128,
        });
    }
    let mut numerators = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; parts];
    fill(&mut current, 0, granularity, &mut numerators);
    Ok(SimplexGrid {
        granularity,
        numerators,
    })
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for c in 0..=remaining {
        current[pos] = c;
        fill(current, pos + 1, remaining - c, out);
    }
}
