//! Contextual best-response regions and the δ-approximate extreme points that
//! serve as the leader's per-round strategy menu.
//!
//! For an assignment `σ` of follower actions to types, the region `X_z(σ)` is
//! the set of leader strategies against which every type `k` best-responds
//! with `σ[k]`. Under the smallest-index tie rule that is
//!
//! ```text
//! u_k(z, x, σ[k]) >= u_k(z, x, a')   for a' > σ[k]
//! u_k(z, x, σ[k]) >  u_k(z, x, a')   for a' < σ[k]
//! ```
//!
//! intersected with the simplex. Regions are enumerated depth-first over the
//! effective (distinct) follower types, pruning any partial assignment whose
//! strict region is already empty.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Context, GameAtContext, GameSpec, MixedStrategy, RANGE_TOLERANCE};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::polytope::{enumerate_vertices, push_unique, sup_distance, Row, DEDUP_TOLERANCE};

/// A witness must clear every strict constraint by more than this.
pub const WITNESS_SLACK: f64 = 1e-9;
/// Types whose payoff matrices agree within this are merged.
pub const TYPE_MERGE_TOLERANCE: f64 = 1e-12;
/// Domination comparisons use this tolerance.
pub const DOMINATION_TOLERANCE: f64 = 1e-12;

/// The follower action each type plays inside a region.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BestResponseAssignment(pub Vec<usize>);

impl BestResponseAssignment {
    pub fn new(actions: Vec<usize>, follower_actions: usize) -> Result<Self> {
        if let Some(a) = actions.iter().find(|a| **a >= follower_actions) {
            return Err(invalid(format!("assignment uses action {a} >= A_f = {follower_actions}")));
        }
        Ok(Self(actions))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// One linear constraint `normal . x >= 0` (or `> 0` when strict) over the
/// support coordinates of a [`HalfspaceSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub strict: bool,
}

impl Constraint {
    fn slack(&self, y: &[f64]) -> f64 {
        self.normal.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

/// Best-response inequalities restricted to the simplex over `support`.
///
/// Coordinates outside `support` are fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceSystem {
    pub leader_actions: usize,
    pub support: Vec<usize>,
    pub constraints: Vec<Constraint>,
}

impl HalfspaceSystem {
    pub fn dim(&self) -> usize {
        self.support.len()
    }

    fn restrict(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.len() != self.leader_actions {
            return None;
        }
        let off_support = (0..self.leader_actions)
            .filter(|a| !self.support.contains(a))
            .any(|a| x[a].abs() > RANGE_TOLERANCE);
        if off_support {
            return None;
        }
        Some(self.support.iter().map(|&a| x[a]).collect())
    }

    fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.leader_actions];
        for (&a, v) in self.support.iter().zip(y) {
            x[a] = *v;
        }
        x
    }

    fn in_simplex(y: &[f64]) -> bool {
        y.iter().all(|v| *v >= -RANGE_TOLERANCE) && (y.iter().sum::<f64>() - 1.0).abs() <= RANGE_TOLERANCE
    }

    /// Membership in the closure (all constraints as `>=`), within `tol`.
    pub fn contains_closed(&self, x: &[f64], tol: f64) -> bool {
        self.restrict(x).is_some_and(|y| {
            Self::in_simplex(&y) && self.constraints.iter().all(|c| c.slack(&y) >= -tol)
        })
    }

    /// Exact membership: strict constraints must hold with positive slack.
    pub fn contains_strict(&self, x: &[f64]) -> bool {
        self.restrict(x).is_some_and(|y| {
            Self::in_simplex(&y)
                && self.constraints.iter().all(|c| {
                    let s = c.slack(&y);
                    if c.strict {
                        s > 0.0
                    } else {
                        s >= 0.0
                    }
                })
        })
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.strict)
    }
}

fn region_system(
    at: &GameAtContext,
    types: &[usize],
    sigma: &[usize],
    support: &[usize],
) -> HalfspaceSystem {
    let mut constraints = Vec::new();
    for (&k, &a) in types.iter().zip(sigma) {
        for other in 0..at.follower_actions() {
            if other == a {
                continue;
            }
            let normal: Vec<f64> = support
                .iter()
                .map(|&l| at.follower_payoff(k, l, a) - at.follower_payoff(k, l, other))
                .collect();
            let strict = other < a;
            if !strict && normal.iter().all(|v| *v == 0.0) {
                continue;
            }
            constraints.push(Constraint {
                normal,
                offset: 0.0,
                strict,
            });
        }
    }
    HalfspaceSystem {
        leader_actions: at.leader_actions(),
        support: support.to_vec(),
        constraints,
    }
}

/// The region `X_z(σ)` over the whole simplex, one entry of `σ` per type.
pub fn region_halfspaces(game: &GameSpec, z: &Context, sigma: &BestResponseAssignment) -> Result<HalfspaceSystem> {
    let at = game.at(z)?;
    if sigma.0.len() != at.types() {
        return Err(invalid(format!(
            "assignment has {} entries, game has {} types",
            sigma.0.len(),
            at.types()
        )));
    }
    BestResponseAssignment::new(sigma.0.clone(), at.follower_actions())?;
    let types: Vec<usize> = (0..at.types()).collect();
    let support: Vec<usize> = (0..at.leader_actions()).collect();
    Ok(region_system(&at, &types, &sigma.0, &support))
}

/// Vertices of the closure of a region, as mixed strategies over all leader
/// actions. Rank-deficient active sets are skipped; an empty region has no
/// vertices.
pub fn region_vertices(system: &HalfspaceSystem) -> Vec<MixedStrategy> {
    let dim = system.dim();
    let mut ineqs: Vec<Row> = system
        .constraints
        .iter()
        .map(|c| Row::new(c.normal.clone(), c.offset))
        .collect();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        ineqs.push(Row::new(e, 0.0));
    }
    let sum = Row::new(vec![1.0; dim], 1.0);
    enumerate_vertices(dim, &ineqs, &[sum])
        .into_iter()
        .filter_map(|y| MixedStrategy::new(system.embed(&y)).ok())
        .collect()
}

/// A strict-interior witness: the point maximizing the smallest slack of the
/// strict constraints (capped at 1) subject to the closed system.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub slack: f64,
}

/// Returns `None` when the strict region is empty, i.e. the closed system is
/// infeasible or no point clears the strict constraints by [`WITNESS_SLACK`].
pub fn strict_witness(system: &HalfspaceSystem) -> Result<Option<Witness>> {
    let dim = system.dim();
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    let mut lp = LinearProgram::new(dim + 1).maximize(objective);
    let mut sum = vec![1.0; dim + 1];
    sum[dim] = 0.0;
    lp.constrain(sum, Relation::Eq, 1.0);
    for c in &system.constraints {
        let mut row = c.normal.clone();
        row.push(if c.strict { -1.0 } else { 0.0 });
        lp.constrain(row, Relation::Ge, c.offset);
    }
    let mut cap = vec![0.0; dim + 1];
    cap[dim] = 1.0;
    lp.constrain(cap, Relation::Le, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { x, value } => {
            if system.has_strict() && value <= WITNESS_SLACK {
                return Ok(None);
            }
            let y = &x[..dim];
            let total: f64 = y.iter().sum();
            let y: Vec<f64> = y.iter().map(|v| v / total).collect();
            Ok(Some(Witness {
                point: system.embed(&y),
                slack: value,
            }))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Lp("witness program is unbounded".into())),
    }
}

/// Groups of follower types with identical payoffs at a context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveTypes {
    /// First member of each group, ascending.
    pub representatives: Vec<usize>,
    /// For each type, the position of its group in `representatives`.
    pub group_of: Vec<usize>,
}

impl EffectiveTypes {
    pub fn identity(types: usize) -> Self {
        Self {
            representatives: (0..types).collect(),
            group_of: (0..types).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.representatives.len()
    }

    /// Expands an assignment over representatives to all types.
    pub fn expand(&self, sigma: &[usize]) -> Vec<usize> {
        self.group_of.iter().map(|&g| sigma[g]).collect()
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.group_of.len())
            .filter(|&k| self.group_of[k] == group)
            .collect()
    }
}

pub fn effective_types(at: &GameAtContext) -> EffectiveTypes {
    let mut representatives: Vec<usize> = Vec::new();
    let mut group_of = Vec::with_capacity(at.types());
    for k in 0..at.types() {
        let m = at.follower_matrix(k);
        let found = representatives.iter().position(|&r| {
            at.follower_matrix(r)
                .iter()
                .zip(m)
                .all(|(a, b)| (a - b).abs() <= TYPE_MERGE_TOLERANCE)
        });
        match found {
            Some(g) => group_of.push(g),
            None => {
                group_of.push(representatives.len());
                representatives.push(k);
            }
        }
    }
    EffectiveTypes {
        representatives,
        group_of,
    }
}

pub fn reduce_effective_types(game: &GameSpec, z: &Context) -> Result<EffectiveTypes> {
    Ok(effective_types(&game.at(z)?))
}

/// Leader actions that survive an index-order sweep removing every action
/// weakly dominated (with one strict inequality) by a surviving action.
pub fn dominated_sweep(at: &GameAtContext) -> Vec<usize> {
    let n = at.leader_actions();
    let mut alive = vec![true; n];
    for a in 0..n {
        let dominated = (0..n).filter(|&b| b != a && alive[b]).any(|b| {
            let mut strict = false;
            for f in 0..at.follower_actions() {
                let (ua, ub) = (at.leader_payoff(a, f), at.leader_payoff(b, f));
                if ua > ub + DOMINATION_TOLERANCE {
                    return false;
                }
                if ua < ub - DOMINATION_TOLERANCE {
                    strict = true;
                }
            }
            strict
        });
        if dominated {
            alive[a] = false;
        }
    }
    (0..n).filter(|&a| alive[a]).collect()
}

pub fn prune_dominated_actions(game: &GameSpec, z: &Context) -> Result<Vec<usize>> {
    Ok(dominated_sweep(&game.at(z)?))
}

/// Knobs for [`approximate_extreme_points`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MenuOptions {
    /// Enumerate assignments over distinct follower types only.
    pub reduce_types: bool,
    /// Restrict the simplex to leader actions that are not dominated.
    pub prune_dominated: bool,
}

impl Default for MenuOptions {
    fn default() -> Self {
        Self {
            reduce_types: true,
            prune_dominated: false,
        }
    }
}

/// One menu entry and the region it certifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MenuPoint {
    pub strategy: MixedStrategy,
    pub sigma: BestResponseAssignment,
    pub perturbed: bool,
}

/// The δ-approximate extreme points at one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremePointSet {
    pub points: Vec<MenuPoint>,
    pub delta: f64,
}

impl ExtremePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn strategies(&self) -> impl Iterator<Item = &MixedStrategy> {
        self.points.iter().map(|p| &p.strategy)
    }

    /// Wraps an externally supplied strategy list. Each point must be a valid
    /// mixed strategy over the leader's actions; its region is read off the
    /// follower best responses.
    pub fn from_exogenous(game: &GameSpec, z: &Context, points: Vec<Vec<f64>>) -> Result<Self> {
        let at = game.at(z)?;
        let mut out = Vec::with_capacity(points.len());
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            if p.len() != at.leader_actions() {
                return Err(invalid(format!(
                    "exogenous point {i} has {} entries, expected {}",
                    p.len(),
                    at.leader_actions()
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > RANGE_TOLERANCE {
                return Err(invalid(format!("exogenous point {i} sums to {sum}")));
            }
            let strategy = MixedStrategy::new(p)
                .map_err(|e| invalid(format!("exogenous point {i} rejected: {e}")))?;
            if !push_unique(&mut seen, strategy.as_slice().to_vec()) {
                continue;
            }
            let sigma = BestResponseAssignment(at.best_responses(&strategy)?);
            out.push(MenuPoint {
                strategy,
                sigma,
                perturbed: false,
            });
        }
        if out.is_empty() {
            return Err(Error::EmptyMenu("no exogenous points supplied".into()));
        }
        Ok(Self {
            points: out,
            delta: 0.0,
        })
    }

    /// Parses a JSON array of strategies and validates it as in
    /// [`ExtremePointSet::from_exogenous`].
    pub fn exogenous_from_json(game: &GameSpec, z: &Context, json: &str) -> Result<Self> {
        let points: Vec<Vec<f64>> = serde_json::from_str(json)?;
        Self::from_exogenous(game, z, points)
    }
}

/// A nonempty region found by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    /// Assignment over all types.
    pub sigma: BestResponseAssignment,
    pub vertices: Vec<Vec<f64>>,
    pub witness: Vec<f64>,
    pub witness_slack: f64,
}

/// Full enumeration output, also used for the JSON debug dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionDump {
    pub effective_types: Vec<usize>,
    pub support: Vec<usize>,
    pub regions: Vec<RegionReport>,
    pub menu: ExtremePointSet,
}

fn lp_context(sigma: &[usize]) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Geometry {
        sigma: sigma.to_vec(),
        reason: e.to_string(),
    }
}

fn enumerate_regions(
    at: &GameAtContext,
    reps: &[usize],
    support: &[usize],
) -> Result<Vec<(Vec<usize>, HalfspaceSystem, Witness)>> {
    let mut found = Vec::new();
    let mut sigma = Vec::with_capacity(reps.len());
    descend(at, reps, support, &mut sigma, &mut found)?;
    Ok(found)
}

fn descend(
    at: &GameAtContext,
    reps: &[usize],
    support: &[usize],
    sigma: &mut Vec<usize>,
    found: &mut Vec<(Vec<usize>, HalfspaceSystem, Witness)>,
) -> Result<()> {
    let level = sigma.len();
    for a in 0..at.follower_actions() {
        sigma.push(a);
        let system = region_system(at, &reps[..=level], sigma, support);
        let witness = strict_witness(&system).map_err(lp_context(sigma))?;
        if let Some(w) = witness {
            if level + 1 == reps.len() {
                found.push((sigma.clone(), system, w));
            } else {
                descend(at, reps, support, sigma, found)?;
            }
        }
        sigma.pop();
    }
    Ok(())
}

/// Computes regions, vertices and the δ-approximate extreme point menu.
pub fn region_dump(at: &GameAtContext, delta: f64, options: MenuOptions) -> Result<RegionDump> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let types = if options.reduce_types {
        effective_types(at)
    } else {
        EffectiveTypes::identity(at.types())
    };
    let support: Vec<usize> = if options.prune_dominated {
        dominated_sweep(at)
    } else {
        (0..at.leader_actions()).collect()
    };
    let regions = enumerate_regions(at, &types.representatives, &support)?;

    let mut points: Vec<MenuPoint> = Vec::new();
    let mut reports = Vec::with_capacity(regions.len());
    for (sigma_reps, system, witness) in regions {
        let sigma = types.expand(&sigma_reps);
        let vertices = region_vertices(&system);
        for v in &vertices {
            let (candidate, perturbed) = if at.best_responses(v)? == sigma {
                (v.clone(), false)
            } else {
                let dir: Vec<f64> = witness.point.iter().zip(v.as_slice()).map(|(w, x)| w - x).collect();
                let reach: f64 = dir.iter().map(|d| d.abs()).sum();
                if reach == 0.0 {
                    continue;
                }
                let t = delta.min(reach) / reach;
                let moved: Vec<f64> = v.as_slice().iter().zip(&dir).map(|(x, d)| x + t * d).collect();
                match MixedStrategy::new(moved) {
                    Ok(m) => (m, true),
                    Err(_) => continue,
                }
            };
            if at.best_responses(&candidate)? != sigma {
                // Numerically on a boundary even after the move; no certified point.
                continue;
            }
            if points
                .iter()
                .any(|p| sup_distance(p.strategy.as_slice(), candidate.as_slice()) <= DEDUP_TOLERANCE)
            {
                continue;
            }
            points.push(MenuPoint {
                strategy: candidate,
                sigma: BestResponseAssignment(sigma.clone()),
                perturbed,
            });
        }
        reports.push(RegionReport {
            sigma: BestResponseAssignment(sigma),
            vertices: vertices.iter().map(|v| v.as_slice().to_vec()).collect(),
            witness: witness.point,
            witness_slack: witness.slack,
        });
    }
    Ok(RegionDump {
        effective_types: types.representatives,
        support,
        regions: reports,
        menu: ExtremePointSet { points, delta },
    })
}

pub fn approximate_extreme_points_at(at: &GameAtContext, delta: f64, options: MenuOptions) -> Result<ExtremePointSet> {
    Ok(region_dump(at, delta, options)?.menu)
}

/// The menu `E_z(δ)` with default options (type reduction on, pruning off).
pub fn approximate_extreme_points(game: &GameSpec, z: &Context, delta: f64) -> Result<ExtremePointSet> {
    approximate_extreme_points_at(&game.at(z)?, delta, MenuOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::{g0, one};
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        sup_distance(a, b) < 1e-12
    }

    #[test]
    fn g0_region_is_the_upper_segment() {
        let sys = region_halfspaces(&g0(), &one(), &BestResponseAssignment(vec![0])).unwrap();
        // p1 - p2 >= 0 on the simplex
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let x = [p, 1.0 - p];
            assert_eq!(sys.contains_closed(&x, 0.0), p >= 0.5, "p = {p}");
        }
        let v = region_vertices(&sys);
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|x| close(x.as_slice(), &[0.5, 0.5])));
        assert!(v.iter().any(|x| close(x.as_slice(), &[1.0, 0.0])));
    }

    #[test]
    fn strict_system_matches_best_response() {
        let g = g0();
        let upper = region_halfspaces(&g, &one(), &BestResponseAssignment(vec![1])).unwrap();
        assert!(!upper.contains_strict(&[0.5, 0.5]));
        assert!(upper.contains_strict(&[0.4, 0.6]));
        assert!(upper.contains_closed(&[0.5, 0.5], 0.0));
    }

    #[test]
    fn dominated_follower_action_gives_empty_strict_region() {
        // action 1 is strictly worse than action 0 for the follower everywhere
        let g = GameSpec::tabular(
            &[vec![0.1, 0.2], vec![0.3, 0.4]],
            &[vec![vec![0.5, 0.0], vec![0.6, -0.2]]],
        )
        .unwrap();
        let sys = region_halfspaces(&g, &one(), &BestResponseAssignment(vec![1])).unwrap();
        assert!(strict_witness(&sys).unwrap().is_none());
        assert!(region_vertices(&sys).is_empty());
    }

    #[test]
    fn single_follower_action_covers_the_simplex() {
        let g = GameSpec::tabular(
            &[vec![0.1], vec![0.3], vec![-0.2]],
            &[vec![vec![0.5], vec![0.6], vec![0.0]]],
        )
        .unwrap();
        let sys = region_halfspaces(&g, &one(), &BestResponseAssignment(vec![0])).unwrap();
        assert!(sys.constraints.is_empty());
        let v = region_vertices(&sys);
        assert_eq!(v.len(), 3);
        let e = approximate_extreme_points(&g, &one(), 0.01).unwrap();
        assert_eq!(e.len(), 3);
        assert!(e.points.iter().all(|p| !p.perturbed));
        for a in 0..3 {
            let unit = MixedStrategy::pure(3, a).unwrap();
            assert!(e.strategies().any(|s| close(s.as_slice(), unit.as_slice())));
        }
    }

    #[test]
    fn infeasible_system_has_no_vertices() {
        let sys = HalfspaceSystem {
            leader_actions: 2,
            support: vec![0, 1],
            constraints: vec![Constraint {
                normal: vec![-1.0, -1.0],
                offset: 0.0,
                strict: false,
            }],
        };
        assert!(region_vertices(&sys).is_empty());
        assert!(strict_witness(&sys).unwrap().is_none());
    }

    #[test]
    fn g0_menu_at_one_hundredth() {
        let e = approximate_extreme_points(&g0(), &one(), 0.01).unwrap();
        let expected = [
            (vec![0.5, 0.5], 0, false),
            (vec![1.0, 0.0], 0, false),
            (vec![0.495, 0.505], 1, true),
            (vec![0.0, 1.0], 1, false),
        ];
        assert_eq!(e.len(), 4);
        for (x, a, perturbed) in expected {
            let p = e
                .points
                .iter()
                .find(|p| sup_distance(p.strategy.as_slice(), &x) < 1e-12)
                .unwrap_or_else(|| panic!("missing {x:?} in {e:?}"));
            assert_eq!(p.sigma.0, vec![a]);
            assert_eq!(p.perturbed, perturbed);
        }
        // two feasible assignments, two vertices each
        assert!(e.len() <= 2 * 2);
    }

    #[test]
    fn perturbation_stays_within_delta() {
        let e = approximate_extreme_points(&g0(), &one(), 0.2).unwrap();
        let moved = e.points.iter().find(|p| p.perturbed).unwrap();
        let l1: f64 = moved.strategy.as_slice().iter().zip([0.5, 0.5]).map(|(a, b)| (a - b).abs()).sum();
        assert!((l1 - 0.2).abs() < 1e-12);
        assert!(approximate_extreme_points(&g0(), &one(), 0.0).is_err());
    }

    /// Type 3 agrees with type 1 when z[1] = 0 and with type 2 when z[0] = 0.
    fn three_types() -> GameSpec {
        let d = 2;
        let (al, af) = (2, 2);
        let t1 = [0.4, 0.1, -0.2, 0.3, 0.25, -0.15, 0.05, 0.2];
        let t2 = [-0.3, 0.2, 0.1, -0.4, 0.3, 0.1, -0.2, 0.45];
        let mut t3 = vec![0.0; 8];
        for i in 0..4 {
            t3[i * d] = t1[i * d];
            t3[i * d + 1] = t2[i * d + 1];
        }
        let mut followers = t1.to_vec();
        followers.extend_from_slice(&t2);
        followers.extend_from_slice(&t3);
        GameSpec::new(d, al, af, 3, vec![0.1; al * af * d], followers).unwrap()
    }

    #[test]
    fn effective_types_examples() {
        let g = three_types();
        let z = Context::new(vec![0.8, 0.0]).unwrap();
        let e = reduce_effective_types(&g, &z).unwrap();
        assert_eq!(e.count(), 2);
        assert_eq!(e.members(0), vec![0, 2]);
        let z = Context::new(vec![0.0, -0.6]).unwrap();
        let e = reduce_effective_types(&g, &z).unwrap();
        assert_eq!(e.members(1), vec![1, 2]);
        let z = Context::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(reduce_effective_types(&g, &z).unwrap(), EffectiveTypes::identity(3));

        let f = vec![vec![0.3, -0.2], vec![0.1, 0.4]];
        let same = GameSpec::tabular(&[vec![0.5, -0.5], vec![0.25, 0.0]], &[f.clone(), f.clone(), f]).unwrap();
        let e = reduce_effective_types(&same, &one()).unwrap();
        assert_eq!(e.count(), 1);
        assert_eq!(e.expand(&[1]), vec![1, 1, 1]);
    }

    #[test]
    fn pruning_examples() {
        let follower = vec![vec![vec![0.0, 0.1], vec![0.2, 0.0]]];
        let g = GameSpec::tabular(&[vec![0.0, 0.0], vec![0.5, 0.5]], &follower).unwrap();
        assert_eq!(prune_dominated_actions(&g, &one()).unwrap(), vec![1]);
        let g = GameSpec::tabular(&[vec![0.3, 0.2], vec![0.3, 0.2]], &follower).unwrap();
        assert_eq!(prune_dominated_actions(&g, &one()).unwrap(), vec![0, 1]);
        let g = GameSpec::tabular(&[vec![1.0, 0.0], vec![0.0, 1.0]], &follower).unwrap();
        assert_eq!(prune_dominated_actions(&g, &one()).unwrap(), vec![0, 1]);
    }

    #[test]
    fn pruned_menu_lives_on_survivors() {
        let g = GameSpec::tabular(
            &[vec![0.0, -0.1], vec![0.5, 0.5], vec![0.2, 0.9]],
            &[vec![vec![0.3, 0.0], vec![0.0, 0.4], vec![0.1, 0.1]]],
        )
        .unwrap();
        let at = g.at(&one()).unwrap();
        let options = MenuOptions {
            prune_dominated: true,
            ..MenuOptions::default()
        };
        let e = approximate_extreme_points_at(&at, 0.01, options).unwrap();
        assert!(!e.is_empty());
        assert!(e.strategies().all(|s| s.as_slice()[0] == 0.0));
    }

    #[test]
    fn exogenous_points_are_validated() {
        let g = g0();
        let e = ExtremePointSet::exogenous_from_json(&g, &one(), "[[0.2, 0.8], [1.0, 0.0]]").unwrap();
        assert_eq!(e.points[0].sigma.0, vec![1]);
        assert_eq!(e.points[1].sigma.0, vec![0]);
        assert!(ExtremePointSet::from_exogenous(&g, &one(), vec![vec![0.5, 0.6]]).is_err());
        assert!(ExtremePointSet::from_exogenous(&g, &one(), vec![vec![1.0]]).is_err());
        assert!(ExtremePointSet::from_exogenous(&g, &one(), vec![vec![1.2, -0.2]]).is_err());
        assert!(ExtremePointSet::from_exogenous(&g, &one(), vec![]).is_err());
    }

    #[test]
    fn region_dump_serializes() {
        let at = g0().at(&one()).unwrap();
        let dump = region_dump(&at, 0.01, MenuOptions::default()).unwrap();
        assert_eq!(dump.regions.len(), 2);
        let json = serde_json::to_value(&dump).unwrap();
        assert_eq!(json["regions"][0]["sigma"], serde_json::json!([0]));
    }

    fn arb_game() -> impl Strategy<Value = (GameSpec, Context)> {
        (1usize..=2, 2usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(d, al, af, k)| {
            let lead = proptest::collection::vec(-1.0f64..1.0, al * af * d);
            let fol = proptest::collection::vec(-1.0f64..1.0, k * al * af * d);
            let z = proptest::collection::vec(-1.0f64..1.0, d);
            (lead, fol, z).prop_map(move |(l, f, z)| {
                let s = 1.0 / d as f64;
                let g = GameSpec::new(
                    d,
                    al,
                    af,
                    k,
                    l.iter().map(|v| v * s).collect(),
                    f.iter().map(|v| v * s).collect(),
                )
                .unwrap();
                (g, Context::new(z).unwrap())
            })
        })
    }

    fn utility_set(g: &GameSpec, z: &Context, e: &ExtremePointSet) -> Vec<Vec<f64>> {
        let at = g.at(z).unwrap();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for s in e.strategies() {
            push_unique(&mut out, at.utility_vector(s).unwrap().values);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn menu_points_certify_their_regions((g, z) in arb_game()) {
            let e = approximate_extreme_points(&g, &z, 1e-3).unwrap();
            prop_assert!(!e.is_empty());
            let at = g.at(&z).unwrap();
            for p in &e.points {
                prop_assert_eq!(&at.best_responses(&p.strategy).unwrap(), &p.sigma.0);
            }
            for (i, p) in e.points.iter().enumerate() {
                for q in &e.points[i + 1..] {
                    prop_assert!(sup_distance(p.strategy.as_slice(), q.strategy.as_slice()) > DEDUP_TOLERANCE);
                }
            }
        }

        #[test]
        fn reduction_preserves_utility_vectors((g, z) in arb_game()) {
            let at = g.at(&z).unwrap();
            let with = approximate_extreme_points_at(&at, 1e-3, MenuOptions::default()).unwrap();
            let without = approximate_extreme_points_at(
                &at,
                1e-3,
                MenuOptions { reduce_types: false, prune_dominated: false },
            )
            .unwrap();
            let a = utility_set(&g, &z, &with);
            let b = utility_set(&g, &z, &without);
            prop_assert_eq!(a.len(), b.len());
            for u in &a {
                prop_assert!(b.iter().any(|v| sup_distance(u, v) <= 1e-9));
            }
        }

        #[test]
        fn menu_size_respects_region_count((g, z) in arb_game()) {
            let at = g.at(&z).unwrap();
            let dump = region_dump(&at, 1e-3, MenuOptions::default()).unwrap();
            let k_eff = dump.effective_types.len() as u32;
            prop_assert!(dump.regions.len() <= at.follower_actions().pow(k_eff));
            let vertex_total: usize = dump.regions.iter().map(|r| r.vertices.len()).sum();
            prop_assert!(dump.menu.len() <= vertex_total);
        }
    }
}
