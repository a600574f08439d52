//! Sufficient conditions for the resampling bound.
//!
//! Two certificates are supported:
//!
//! * classical: `p(A) <= x_A * prod_{B ~ A} (1 - x_B)` with `0 < x_A < 1`,
//!   giving `E[N_A] <= x_A / (1 - x_A)`;
//! * cluster: `p(A) <= mu_A / Z(Γ̄(A), mu)` with `0 < mu_A < inf`, where
//!   `Z(S, mu)` sums `prod_{B in I} mu_B` over the independent subsets `I`
//!   of `S`, giving `E[N_A] <= mu_A`.
//!
//! Under `mu = x / (1 - x)` the cluster bound is never smaller than the
//! classical one.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DependencyGraph, EventId, Instance};

/// Default cap on `|S|` for exact independence polynomial evaluation.
pub const DEFAULT_NEIGHBORHOOD_CAP: usize = 25;

/// Relative tolerance for `p(A) <= bound` comparisons.
pub const RELATIVE_EPSILON: f64 = 1e-12;

const BISECTION_ITERATIONS: usize = 60;
const GOLDEN_ITERATIONS: usize = 200;
const SEARCH_MU_MIN: f64 = 1e-9;
const SEARCH_MU_MAX: f64 = 1e9;

/// Per-event cluster weights, each in `(0, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MuVector(Vec<f64>);

impl MuVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameters(format!("mu[{i}] = {v} is not in (0, inf)")));
        }
        Ok(MuVector(values))
    }

    pub fn uniform(n: usize, mu: f64) -> Result<Self> {
        Self::new(vec![mu; n])
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

    /// `sum_A mu_A`, the bound on the expected total number of resamplings.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<EventId> for MuVector {
    type Output = f64;
    fn index(&self, i: EventId) -> &f64 {
        &self.0[i]
    }
}

/// Per-event classical weights, each in `(0, 1)`.
///
/// Branching simulations also accept a rate of exactly 0 (a label that never
/// spawns); such vectors come from [`XVector::allowing_zero`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct XVector(Vec<f64>);

impl XVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidParameters(format!("x[{i}] = {v} is not in (0, 1)")));
        }
        Ok(XVector(values))
    }

    pub fn allowing_zero(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v < 1.0)) {
            return Err(Error::InvalidParameters(format!("x[{i}] = {v} is not in [0, 1)")));
        }
        Ok(XVector(values))
    }

    pub fn uniform(n: usize, x: f64) -> Result<Self> {
        Self::new(vec![x; n])
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

    /// `sum_A x_A / (1 - x_A)`.
    pub fn total(&self) -> f64 {
        self.0.iter().map(|x| x / (1.0 - x)).sum()
    }
}

impl Index<EventId> for XVector {
    type Output = f64;
    fn index(&self, i: EventId) -> &f64 {
        &self.0[i]
    }
}

/// `mu_A = x_A / (1 - x_A)`. Fails only for vectors holding a zero rate.
pub fn mu_from_x(x: &XVector) -> Result<MuVector> {
    MuVector::new(x.0.iter().map(|x| x / (1.0 - x)).collect())
}

/// `x_A = mu_A / (mu_A + 1)`.
pub fn x_from_mu(mu: &MuVector) -> XVector {
    XVector(mu.0.iter().map(|m| m / (m + 1.0)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    Classical,
    Cluster,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::Classical => "classical",
            ConditionKind::Cluster => "cluster",
        })
    }
}

impl FromStr for ConditionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(ConditionKind::Classical),
            "cluster" => Ok(ConditionKind::Cluster),
            other => Err(Error::InvalidArgument(format!("unknown condition {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventBound {
    pub event: EventId,
    pub probability: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub per_event: Vec<EventBound>,
    pub satisfied: bool,
    /// `sum mu_A` (cluster) or `sum x_A / (1 - x_A)` (classical).
    pub total_bound: f64,
}

impl ConditionReport {
    fn assemble(condition: ConditionKind, probabilities: &[f64], bounds: &[f64], total_bound: f64) -> Self {
        let per_event: Vec<EventBound> = probabilities
            .iter()
            .zip(bounds)
            .enumerate()
            .map(|(event, (&p, &bound))| EventBound {
                event,
                probability: p,
                bound,
                slack: bound - p,
                satisfied: within_bound(p, bound),
            })
            .collect();
        ConditionReport {
            condition,
            satisfied: per_event.iter().all(|e| e.satisfied),
            per_event,
            total_bound,
        }
    }
}

/// `p <= bound` up to [`RELATIVE_EPSILON`].
pub fn within_bound(p: f64, bound: f64) -> bool {
    p <= bound + RELATIVE_EPSILON * bound.abs().max(p.abs())
}

/// A vertex subset with its induced adjacency packed into bitmasks.
pub(crate) struct InducedSubgraph {
    pub(crate) vertices: Vec<EventId>,
    neighbors: Vec<u64>,
}

impl InducedSubgraph {
    pub(crate) fn new(graph: &DependencyGraph, vertex_set: &[EventId], cap: usize) -> Result<Self> {
        let mut vertices = vertex_set.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() > cap.min(64) {
            return Err(Error::NeighborhoodTooLarge {
                size: vertices.len(),
                cap: cap.min(64),
            });
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= graph.num_vertices()) {
            return Err(Error::UnknownEvent(v));
        }
        let neighbors = vertices
            .iter()
            .map(|&a| {
                vertices
                    .iter()
                    .enumerate()
                    .filter(|&(_, &b)| graph.adjacent(a, b))
                    .fold(0u64, |m, (j, _)| m | (1 << j))
            })
            .collect();
        Ok(InducedSubgraph { vertices, neighbors })
    }

    fn full_mask(&self) -> u64 {
        if self.vertices.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.vertices.len()) - 1
        }
    }

    /// Sum over independent subsets of `mask` of the product of `weight`.
    fn polynomial(&self, mask: u64, weight: &[f64]) -> f64 {
        if mask == 0 {
            return 1.0;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1u64 << v);
        let w = weight[v];
        let blocked = self.neighbors[v] & rest;
        if blocked == 0 {
            (1.0 + w) * self.polynomial(rest, weight)
        } else {
            self.polynomial(rest, weight) + w * self.polynomial(rest & !blocked, weight)
        }
    }

    /// Every independent subset as a bitmask over `vertices`, in
    /// lexicographic include/exclude order starting from the empty set.
    pub(crate) fn independent_masks(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_masks(0, self.full_mask(), &mut out);
        out
    }

    fn collect_masks(&self, chosen: u64, available: u64, out: &mut Vec<u64>) {
        if available == 0 {
            out.push(chosen);
            return;
        }
        let v = available.trailing_zeros() as usize;
        let rest = available & !(1u64 << v);
        self.collect_masks(chosen, rest, out);
        self.collect_masks(chosen | (1 << v), rest & !self.neighbors[v], out);
    }

    pub(crate) fn members(&self, mask: u64) -> Vec<EventId> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect()
    }
}

/// `Z(S, mu)`: sum over independent `I ⊆ S` (in the induced subgraph) of
/// `prod_{B in I} mu_B`. The empty set contributes 1.
pub fn independence_polynomial_sum(graph: &DependencyGraph, vertex_set: &[EventId], mu: &MuVector) -> Result<f64> {
    independence_polynomial_with_cap(graph, vertex_set, mu.as_slice(), DEFAULT_NEIGHBORHOOD_CAP)
}

/// As [`independence_polynomial_sum`] with arbitrary per-event weights
/// (indexed by event id) and an explicit size cap (at most 64).
pub fn independence_polynomial_with_cap(
    graph: &DependencyGraph,
    vertex_set: &[EventId],
    weights: &[f64],
    cap: usize,
) -> Result<f64> {
    let sub = InducedSubgraph::new(graph, vertex_set, cap)?;
    if weights.len() < graph.num_vertices() {
        return Err(Error::InvalidParameters(format!(
            "{} weights for {} vertices",
            weights.len(),
            graph.num_vertices()
        )));
    }
    let local: Vec<f64> = sub.vertices.iter().map(|&v| weights[v]).collect();
    Ok(sub.polynomial(sub.full_mask(), &local))
}

/// All independent subsets of `vertex_set`, each sorted, starting with `[]`.
pub fn independent_subsets(graph: &DependencyGraph, vertex_set: &[EventId]) -> Result<Vec<Vec<EventId>>> {
    let sub = InducedSubgraph::new(graph, vertex_set, DEFAULT_NEIGHBORHOOD_CAP)?;
    Ok(sub.independent_masks().into_iter().map(|m| sub.members(m)).collect())
}

/// `mu_A / Z(Γ̄(A), mu)`.
pub fn cluster_bound(graph: &DependencyGraph, mu: &MuVector, event: EventId) -> Result<f64> {
    let z = independence_polynomial_sum(graph, &graph.inclusive_neighbors(event), mu)?;
    Ok(mu[event] / z)
}

/// `x_A * prod_{B ~ A} (1 - x_B)`.
pub fn classical_bound(graph: &DependencyGraph, x: &XVector, event: EventId) -> f64 {
    x[event] * graph.neighbors(event).iter().map(|&b| 1.0 - x[b]).product::<f64>()
}

fn check_sizes(instance: &Instance, graph: &DependencyGraph, params: usize) -> Result<()> {
    let n = instance.num_events();
    if graph.num_vertices() != n || params != n {
        return Err(Error::InvalidParameters(format!(
            "instance has {n} events, graph has {} vertices, parameter vector has {params} entries",
            graph.num_vertices()
        )));
    }
    Ok(())
}

pub fn check_cluster_condition(instance: &Instance, graph: &DependencyGraph, mu: &MuVector) -> Result<ConditionReport> {
    check_sizes(instance, graph, mu.len())?;
    let probabilities = instance.probabilities()?;
    let bounds = (0..instance.num_events())
        .map(|a| cluster_bound(graph, mu, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::assemble(
        ConditionKind::Cluster,
        &probabilities,
        &bounds,
        mu.total(),
    ))
}

pub fn check_classical_condition(instance: &Instance, graph: &DependencyGraph, x: &XVector) -> Result<ConditionReport> {
    check_sizes(instance, graph, x.len())?;
    let probabilities = instance.probabilities()?;
    let bounds: Vec<f64> = (0..instance.num_events())
        .map(|a| classical_bound(graph, x, a))
        .collect();
    Ok(ConditionReport::assemble(
        ConditionKind::Classical,
        &probabilities,
        &bounds,
        x.total(),
    ))
}

/// Checks `kind` with parameters given as a mu vector; the classical
/// condition uses `x = mu / (1 + mu)`.
pub fn check_condition(
    kind: ConditionKind,
    instance: &Instance,
    graph: &DependencyGraph,
    mu: &MuVector,
) -> Result<ConditionReport> {
    match kind {
        ConditionKind::Cluster => check_cluster_condition(instance, graph, mu),
        ConditionKind::Classical => check_classical_condition(instance, graph, &x_from_mu(mu)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformSearch {
    pub mu: f64,
    pub report: ConditionReport,
}

/// Finds the smallest uniform `mu` (equivalently `x = mu / (1 + mu)`) for
/// which `kind` holds, or `None` when no uniform value works.
///
/// Each per-event bound is unimodal in the common parameter, so the feasible
/// set is an interval. A golden-section search over `ln mu` locates the point
/// maximizing `min_A bound_A / p(A)`; bisection between 0 and that point then
/// finds the left end of the interval.
pub fn uniform_mu_search(
    instance: &Instance,
    graph: &DependencyGraph,
    kind: ConditionKind,
) -> Result<Option<UniformSearch>> {
    check_sizes(instance, graph, instance.num_events())?;
    let n = instance.num_events();
    let probabilities = instance.probabilities()?;
    let active: Vec<EventId> = (0..n).filter(|&a| probabilities[a] > 0.0).collect();

    let bounds_at = |mu: f64| -> Result<Vec<f64>> {
        let mus = MuVector::uniform(n, mu)?;
        match kind {
            ConditionKind::Cluster => active.iter().map(|&a| cluster_bound(graph, &mus, a)).collect(),
            ConditionKind::Classical => {
                let xs = x_from_mu(&mus);
                Ok(active.iter().map(|&a| classical_bound(graph, &xs, a)).collect())
            }
        }
    };
    // `exact` asks for nonnegative slack, so the reported point does not
    // lean on the comparison tolerance unless it has to.
    let feasible_with = |mu: f64, exact: bool| -> Result<bool> {
        Ok(bounds_at(mu)?.iter().zip(&active).all(|(&b, &a)| {
            let p = probabilities[a];
            if exact {
                p <= b
            } else {
                within_bound(p, b)
            }
        }))
    };
    let finish = |mu: f64| -> Result<Option<UniformSearch>> {
        let mus = MuVector::uniform(n, mu)?;
        let report = check_condition(kind, instance, graph, &mus)?;
        Ok(Some(UniformSearch { mu, report }))
    };

    if active.is_empty() {
        return finish(SEARCH_MU_MIN);
    }
    if active.iter().any(|&a| probabilities[a] >= 1.0) {
        return Ok(None);
    }

    let score = |t: f64| -> Result<f64> {
        Ok(bounds_at(t.exp())?
            .iter()
            .zip(&active)
            .map(|(&b, &a)| b / probabilities[a])
            .fold(f64::INFINITY, f64::min))
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (SEARCH_MU_MIN.ln(), SEARCH_MU_MAX.ln());
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (score(c)?, score(d)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = score(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = score(d)?;
        }
    }
    let peak = ((lo + hi) / 2.0).exp();
    if !feasible_with(peak, false)? {
        return Ok(None);
    }
    let exact = feasible_with(peak, true)?;

    let (mut infeasible, mut ok) = (0.0, peak);
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (infeasible + ok);
        if mid <= 0.0 {
            break;
        }
        if feasible_with(mid, exact)? {
            ok = mid;
        } else {
            infeasible = mid;
        }
    }
    finish(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Event, Predicate, VarSpec};

    fn triangle() -> DependencyGraph {
        DependencyGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn path3() -> DependencyGraph {
        DependencyGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn ones(n: usize) -> MuVector {
        MuVector::uniform(n, 1.0).unwrap()
    }

    #[test]
    fn polynomial_small_cases() {
        let g = DependencyGraph::from_edges(5, &[]).unwrap();
        assert_eq!(independence_polynomial_sum(&g, &[], &ones(5)).unwrap(), 1.0);
        assert_eq!(
            independence_polynomial_sum(&g, &[0, 1, 2, 3, 4], &ones(5)).unwrap(),
            32.0
        );
        assert_eq!(
            independence_polynomial_sum(&triangle(), &[0, 1, 2], &ones(3)).unwrap(),
            4.0
        );
        assert_eq!(
            independence_polynomial_sum(&path3(), &[0, 1, 2], &ones(3)).unwrap(),
            5.0
        );
    }

    #[test]
    fn polynomial_cap() {
        let g = DependencyGraph::from_edges(30, &[]).unwrap();
        let all: Vec<usize> = (0..30).collect();
        assert_eq!(
            independence_polynomial_sum(&g, &all, &ones(30)),
            Err(Error::NeighborhoodTooLarge { size: 30, cap: 25 })
        );
        let z = independence_polynomial_with_cap(&g, &all, ones(30).as_slice(), 30).unwrap();
        assert_eq!(z, (1u64 << 30) as f64);
    }

    #[test]
    fn independent_subsets_of_path() {
        let sets = independent_subsets(&path3(), &[0, 1, 2]).unwrap();
        let mut sorted = sets.clone();
        sorted.sort();
        assert_eq!(sorted, vec![vec![], vec![0], vec![0, 2], vec![1], vec![2]]);
        assert_eq!(sets[0], Vec::<usize>::new());
    }

    fn single_event_instance(n_vars: usize, p_quarter: bool) -> Instance {
        let vars = vec![VarSpec::fair_coin(); n_vars];
        let signs = vec![true; if p_quarter { 2 } else { 1 }];
        let vbl: Vec<usize> = (0..signs.len()).collect();
        Instance::new(vars, vec![Event::new(vbl, Predicate::Clause(signs)).unwrap()]).unwrap()
    }

    #[test]
    fn isolated_event_cluster_bound() {
        let inst = single_event_instance(2, true);
        let g = DependencyGraph::from_instance(&inst);
        let r = check_cluster_condition(&inst, &g, &ones(1)).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.per_event[0].bound, 0.5);
        assert_eq!(r.per_event[0].slack, 0.25);
        assert_eq!(r.total_bound, 1.0);
    }

    #[test]
    fn isolated_event_above_bound_fails() {
        // p = 1/2 > mu / (1 + mu) = 1/3
        let inst = single_event_instance(1, false);
        let g = DependencyGraph::from_instance(&inst);
        let r = check_cluster_condition(&inst, &g, &MuVector::new(vec![0.5]).unwrap()).unwrap();
        assert!(!r.satisfied);
        assert!(r.per_event[0].slack < 0.0);
    }

    #[test]
    fn edge_cluster_bound_is_one_third() {
        let g = DependencyGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!((cluster_bound(&g, &ones(2), 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn classical_bounds() {
        let iso = DependencyGraph::from_edges(1, &[]).unwrap();
        assert_eq!(classical_bound(&iso, &XVector::uniform(1, 0.5).unwrap(), 0), 0.5);
        let edge = DependencyGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(classical_bound(&edge, &XVector::uniform(2, 0.5).unwrap(), 0), 0.25);
        let b = classical_bound(&triangle(), &XVector::uniform(3, 1.0 / 3.0).unwrap(), 0);
        assert!((b - 4.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn transforms() {
        let mu = mu_from_x(&XVector::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(mu.as_slice(), &[1.0]);
        let x = x_from_mu(&MuVector::new(vec![1.0 / 3.0]).unwrap());
        assert!((x[0] - 0.25).abs() < 1e-15);
        assert!(mu_from_x(&XVector::allowing_zero(vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(MuVector::new(vec![0.0]).is_err());
        assert!(MuVector::new(vec![f64::INFINITY]).is_err());
        assert!(MuVector::new(vec![f64::NAN]).is_err());
        assert!(XVector::new(vec![1.0]).is_err());
        assert!(XVector::new(vec![0.0]).is_err());
        assert!(XVector::allowing_zero(vec![0.0]).is_ok());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let inst = single_event_instance(2, true);
        let g = DependencyGraph::from_instance(&inst);
        assert!(check_cluster_condition(&inst, &g, &ones(2)).is_err());
    }

    #[test]
    fn uniform_search_isolated_event() {
        // p = 1/4 needs mu / (1 + mu) >= 1/4, i.e. mu >= 1/3
        let inst = single_event_instance(2, true);
        let g = DependencyGraph::from_instance(&inst);
        let s = uniform_mu_search(&inst, &g, ConditionKind::Cluster).unwrap().unwrap();
        assert!((s.mu - 1.0 / 3.0).abs() < 1e-9);
        assert!(s.report.satisfied);
        let c = uniform_mu_search(&inst, &g, ConditionKind::Classical).unwrap().unwrap();
        assert!((c.mu - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_search_reports_infeasible() {
        let vars = vec![VarSpec::fair_coin()];
        let inst = Instance::new(vars, vec![Event::new(vec![0], Predicate::custom(|_| true)).unwrap()]).unwrap();
        let g = DependencyGraph::from_instance(&inst);
        assert!(uniform_mu_search(&inst, &g, ConditionKind::Cluster).unwrap().is_none());
    }
}
