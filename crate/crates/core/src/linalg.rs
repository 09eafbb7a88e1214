//! Small dense linear solves used by vertex enumeration.

/// Pivots below this (after row scaling) mark a system as rank deficient.
const PIVOT_TOLERANCE: f64 = 1e-10;

/// Solves the square system `a x = b` (row-major `a`, `n x n`) by Gaussian
/// elimination with partial pivoting. Returns `None` when the system is
/// numerically singular.
pub fn solve_square(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for i in 0..n {
        let scale = a[i * n..(i + 1) * n]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        for v in &mut a[i * n..(i + 1) * n] {
            *v /= scale;
        }
        b[i] /= scale;
    }
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < PIVOT_TOLERANCE {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Some(x)
}
