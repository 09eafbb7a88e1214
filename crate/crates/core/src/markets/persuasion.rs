//! Signaling over a polytope of incentive-compatible policies.
//!
//! Policies are points `μ` of `P = {μ : A μ <= c}` and a receiver of type `i`
//! yields `u(z, μ, i) = z^T C_i μ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{dot, Context, RANGE_TOLERANCE};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::polytope::{enumerate_vertices, Row};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PersuasionDocument", into = "PersuasionDocument")]
pub struct PersuasionSpec {
    context_dim: usize,
    signal_dim: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    // [i][k][l]: type i, context coordinate k, signal coordinate l
    types: Vec<Vec<Vec<f64>>>,
    vertices: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PersuasionDocument {
    d: usize,
    p: usize,
    #[serde(rename = "A")]
    rows: Vec<Vec<f64>>,
    c: Vec<f64>,
    types: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<PersuasionDocument> for PersuasionSpec {
    type Error = Error;
    fn try_from(doc: PersuasionDocument) -> Result<Self> {
        PersuasionSpec::new(doc.d, doc.p, doc.rows, doc.c, doc.types)
    }
}

impl From<PersuasionSpec> for PersuasionDocument {
    fn from(s: PersuasionSpec) -> Self {
        Self {
            d: s.context_dim,
            p: s.signal_dim,
            rows: s.rows,
            c: s.rhs,
            types: s.types,
        }
    }
}

impl PersuasionSpec {
    /// Checks shapes, that `P` is nonempty and bounded, and that
    /// `||C_i μ||_1 <= 1` on every vertex so utilities stay in `[-1, 1]`.
    pub fn new(
        context_dim: usize,
        signal_dim: usize,
        rows: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        types: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        Self::build(context_dim, signal_dim, rows, rhs, types, false)
    }

    /// Like [`PersuasionSpec::new`], but shrinks the type matrices by a
    /// common factor when the scale guard would fail.
    pub fn normalized(
        context_dim: usize,
        signal_dim: usize,
        rows: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        types: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        Self::build(context_dim, signal_dim, rows, rhs, types, true)
    }

    fn build(
        context_dim: usize,
        signal_dim: usize,
        rows: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        types: Vec<Vec<Vec<f64>>>,
        normalize: bool,
    ) -> Result<Self> {
        if context_dim == 0 || signal_dim == 0 || types.is_empty() {
            return Err(invalid("persuasion needs d, p >= 1 and at least one receiver type"));
        }
        if rows.len() != rhs.len() || rows.iter().any(|r| r.len() != signal_dim) {
            return Err(invalid("polytope rows do not match p or the right-hand side"));
        }
        for (i, c) in types.iter().enumerate() {
            if c.len() != context_dim || c.iter().any(|r| r.len() != signal_dim) {
                return Err(invalid(format!("type matrix {i} is not {context_dim} x {signal_dim}")));
            }
        }
        if rows.iter().flatten().chain(&rhs).chain(types.iter().flatten().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite persuasion coefficient"));
        }
        let mut spec = Self {
            context_dim,
            signal_dim,
            rows,
            rhs,
            types,
            vertices: Vec::new(),
        };
        for l in 0..signal_dim {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; signal_dim];
                c[l] = sign;
                match spec.maximize(&c)? {
                    LpOutcome::Optimal { .. } => {}
                    LpOutcome::Infeasible => return Err(invalid("signaling polytope is empty")),
                    LpOutcome::Unbounded => return Err(invalid("signaling polytope is unbounded")),
                }
            }
        }
        let ineqs: Vec<Row> = spec
            .rows
            .iter()
            .zip(&spec.rhs)
            .map(|(a, b)| Row::new(a.iter().map(|v| -v).collect(), -b))
            .collect();
        spec.vertices = enumerate_vertices(signal_dim, &ineqs, &[]);
        let mut bound = spec.utility_bound();
        if normalize && bound > 1.0 {
            for v in spec.types.iter_mut().flatten().flatten() {
                *v /= bound;
            }
            bound = spec.utility_bound();
        }
        if bound > 1.0 + RANGE_TOLERANCE {
            return Err(Error::OutOfRange(format!("persuasion utilities reach {bound} in magnitude")));
        }
        Ok(spec)
    }

    /// `max_i max_{v vertex} ||C_i v||_1`, the worst `|u|` over `[-1, 1]^d`.
    pub fn utility_bound(&self) -> f64 {
        self.types
            .iter()
            .flat_map(|c| {
                self.vertices
                    .iter()
                    .map(move |v| c.iter().map(|row| dot(row, v).abs()).sum::<f64>())
            })
            .fold(0.0, f64::max)
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    pub fn types(&self) -> usize {
        self.types.len()
    }

    pub fn rows(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.rows, &self.rhs)
    }

    pub fn type_matrix(&self, i: usize) -> &[Vec<f64>] {
        &self.types[i]
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// `C_i^T z`.
    pub fn coefficients(&self, z: &Context, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.signal_dim];
        for (zk, row) in z.as_slice().iter().zip(&self.types[i]) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += zk * c;
            }
        }
        out
    }

    pub fn utility(&self, z: &Context, mu: &[f64], i: usize) -> f64 {
        dot(&self.coefficients(z, i), mu)
    }

    pub fn contains(&self, mu: &[f64], tol: f64) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(a, b)| dot(a, mu) <= b + tol)
    }

    /// `max <c, μ>` over `P`, with `μ = μ+ - μ-` so the solver's nonnegative
    /// variables cover all of `R^p`.
    fn maximize(&self, c: &[f64]) -> Result<LpOutcome> {
        let p = self.signal_dim;
        let split: Vec<f64> = c.iter().copied().chain(c.iter().map(|v| -v)).collect();
        let mut lp = LinearProgram::new(2 * p).maximize(split);
        for (a, b) in self.rows.iter().zip(&self.rhs) {
            lp.constrain(a.iter().copied().chain(a.iter().map(|v| -v)).collect(), Relation::Le, *b);
        }
        Ok(match lp.solve()? {
            LpOutcome::Optimal { x, .. } => {
                let mu: Vec<f64> = (0..p).map(|l| x[l] - x[p + l]).collect();
                let value = dot(c, &mu);
                LpOutcome::Optimal { x: mu, value }
            }
            other => other,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `argmax_{μ in P} sum_i ω[i] z^T C_i μ`, an optimal basic solution of the
/// simplex method under Bland's rule.
pub fn persuasion_policy_signal(spec: &PersuasionSpec, z: &Context, omega: &[f64]) -> Result<Vec<f64>> {
    if omega.len() != spec.types() {
        return Err(invalid("mixture length differs from the number of receiver types"));
    }
    let mut c = vec![0.0; spec.signal_dim];
    for (i, w) in omega.iter().enumerate() {
        if *w != 0.0 {
            for (o, v) in c.iter_mut().zip(spec.coefficients(z, i)) {
                *o += w * v;
            }
        }
    }
    match spec.maximize(&c)? {
        LpOutcome::Optimal { x, .. } => Ok(x),
        LpOutcome::Infeasible => Err(invalid("signaling polytope became infeasible")),
        LpOutcome::Unbounded => Err(invalid("signaling objective is unbounded")),
    }
}
