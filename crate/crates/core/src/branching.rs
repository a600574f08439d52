//! Random tree growth processes over the dependency graph and the exact
//! probabilities with which they produce a given tree.
//!
//! In the Moser-Tardos process every node labeled `A` gets, independently for
//! each `B` in Γ̄(A), a child labeled `B` with probability `x_B`. The improved
//! process draws the same child set but restarts the draw until the child
//! labels form an independent set, with `x_B = mu_B / (mu_B + 1)`. Its child
//! set is therefore an independent `I ⊆ Γ̄(A)` chosen with probability
//! proportional to `w(I) = prod_{u in I} x_u * prod_{u in Γ̄(A) \ I} (1 - x_u)`.
//!
//! Closed forms: for a proper tree `T` rooted at `A0`
//!
//! ```text
//! p_T  = (1 - x_A0) / x_A0 * prod_{v in T} x_{A_v} prod_{B ~ A_v} (1 - x_B)
//! p'_T = mu_A0^{-1} * prod_{v in T} mu_{A_v} / Z(Γ̄(A_v), mu)
//! ```
//!
//! the latter for strongly proper `T` only.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    independence_polynomial_sum, x_from_mu, InducedSubgraph, MuVector, XVector, DEFAULT_NEIGHBORHOOD_CAP,
};
use crate::error::{Error, Result};
use crate::model::{DependencyGraph, EventId};
use crate::rng;
use crate::stats::binomial_std_err;
use crate::witness::{is_proper, is_strongly_proper, LabeledRootedTree};

pub const DEFAULT_DEPTH_CAP: usize = 64;
pub const DEFAULT_TREE_COUNT_CAP: usize = 1_000_000;
/// Cumulative restarts of the rejection subprocess allowed in one run.
pub const REJECTION_LIMIT: u64 = 1_000_000_000;

const TALLY_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingLimits {
    /// Maximum number of generations, the root's included.
    pub depth_cap: usize,
    /// Stop as soon as the tree has more nodes than this.
    pub node_cap: Option<usize>,
}

impl Default for BranchingLimits {
    fn default() -> Self {
        BranchingLimits {
            depth_cap: DEFAULT_DEPTH_CAP,
            node_cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    DepthCap,
    NodeCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchingOutcome {
    /// The finished tree; `None` when growth was cut off.
    pub tree: Option<LabeledRootedTree>,
    pub truncation: Option<Truncation>,
    /// Nonempty generations produced. Equals the depth cap on depth
    /// truncation.
    pub generations_used: usize,
    pub rejection_rounds: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    MoserTardos,
    Improved,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::MoserTardos => "moser-tardos",
            ProcessKind::Improved => "improved",
        })
    }
}

impl FromStr for ProcessKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moser-tardos" | "mt" => Ok(ProcessKind::MoserTardos),
            "improved" => Ok(ProcessKind::Improved),
            other => Err(Error::InvalidArgument(format!("unknown process {other:?}"))),
        }
    }
}

/// A process together with its parameters.
#[derive(Clone, Copy, Debug)]
pub enum Process<'a> {
    MoserTardos(&'a XVector),
    Improved(&'a MuVector),
}

impl Process<'_> {
    pub fn kind(&self) -> ProcessKind {
        match self {
            Process::MoserTardos(_) => ProcessKind::MoserTardos,
            Process::Improved(_) => ProcessKind::Improved,
        }
    }
}

/// Precomputed neighborhoods and rates for repeated simulation.
#[derive(Clone, Debug)]
pub struct BranchingSimulator<'g> {
    graph: &'g DependencyGraph,
    kind: ProcessKind,
    rates: Vec<f64>,
    neighborhoods: Vec<Vec<EventId>>,
}

impl<'g> BranchingSimulator<'g> {
    pub fn new(graph: &'g DependencyGraph, process: Process<'_>) -> Result<Self> {
        let rates = match process {
            Process::MoserTardos(x) => x.as_slice().to_vec(),
            Process::Improved(mu) => x_from_mu(mu).as_slice().to_vec(),
        };
        if rates.len() != graph.num_vertices() {
            return Err(Error::InvalidParameters(format!(
                "{} parameters for {} vertices",
                rates.len(),
                graph.num_vertices()
            )));
        }
        let neighborhoods = (0..graph.num_vertices())
            .map(|a| graph.inclusive_neighbors(a))
            .collect();
        Ok(BranchingSimulator {
            graph,
            kind: process.kind(),
            rates,
            neighborhoods,
        })
    }

    fn bernoulli_children<R: Rng + ?Sized>(&self, label: EventId, rng: &mut R, out: &mut Vec<EventId>) {
        out.clear();
        for &u in &self.neighborhoods[label] {
            if rng.random::<f64>() < self.rates[u] {
                out.push(u);
            }
        }
    }

    /// Child labels of one node labeled `label`. For the improved process
    /// the draw repeats until independent, adding each restart to
    /// `rejections`.
    pub fn child_labels<R: Rng + ?Sized>(
        &self,
        label: EventId,
        rng: &mut R,
        rejections: &mut u64,
    ) -> Result<Vec<EventId>> {
        let mut out = Vec::new();
        self.bernoulli_children(label, rng, &mut out);
        if self.kind == ProcessKind::Improved {
            while !self.graph.is_independent(&out) {
                *rejections += 1;
                if *rejections > REJECTION_LIMIT {
                    return Err(Error::RejectionLimit { limit: REJECTION_LIMIT });
                }
                self.bernoulli_children(label, rng, &mut out);
            }
        }
        Ok(out)
    }

    pub fn simulate<R: Rng + ?Sized>(
        &self,
        root: EventId,
        limits: BranchingLimits,
        rng: &mut R,
    ) -> Result<BranchingOutcome> {
        if limits.depth_cap == 0 {
            return Err(Error::InvalidArgument("depth cap must be at least 1".into()));
        }
        if root >= self.graph.num_vertices() {
            return Err(Error::UnknownEvent(root));
        }
        let mut tree = LabeledRootedTree::leaf(root);
        let mut rejection_rounds = 0u64;
        let mut current = vec![0usize];
        let mut generations_used = 1;
        let truncated = |truncation, generations_used, rejection_rounds| BranchingOutcome {
            tree: None,
            truncation: Some(truncation),
            generations_used,
            rejection_rounds,
        };
        loop {
            let mut next = Vec::new();
            for &v in &current {
                let label = tree.nodes()[v].label;
                for child in self.child_labels(label, rng, &mut rejection_rounds)? {
                    next.push(tree.add_child(v, child));
                }
                if limits.node_cap.is_some_and(|cap| tree.len() > cap) {
                    return Ok(truncated(Truncation::NodeCap, generations_used, rejection_rounds));
                }
            }
            if next.is_empty() {
                return Ok(BranchingOutcome {
                    tree: Some(tree),
                    truncation: None,
                    generations_used,
                    rejection_rounds,
                });
            }
            if generations_used == limits.depth_cap {
                return Ok(truncated(Truncation::DepthCap, generations_used, rejection_rounds));
            }
            generations_used += 1;
            current = next;
        }
    }
}

pub fn simulate_mt_branching<R: Rng + ?Sized>(
    graph: &DependencyGraph,
    x: &XVector,
    root: EventId,
    limits: BranchingLimits,
    rng: &mut R,
) -> Result<BranchingOutcome> {
    BranchingSimulator::new(graph, Process::MoserTardos(x))?.simulate(root, limits, rng)
}

pub fn simulate_improved_branching<R: Rng + ?Sized>(
    graph: &DependencyGraph,
    mu: &MuVector,
    root: EventId,
    limits: BranchingLimits,
    rng: &mut R,
) -> Result<BranchingOutcome> {
    BranchingSimulator::new(graph, Process::Improved(mu))?.simulate(root, limits, rng)
}

/// Draws a subset of `vertex_set` by independent Bernoulli(x) trials and
/// redraws until it is independent. Returns the set and the restart count.
pub fn rejection_subprocess<R: Rng + ?Sized>(
    graph: &DependencyGraph,
    vertex_set: &[EventId],
    x: &XVector,
    rng: &mut R,
) -> Result<(Vec<EventId>, u64)> {
    let mut vertices = vertex_set.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let mut rejections = 0u64;
    loop {
        let drawn: Vec<EventId> = vertices
            .iter()
            .copied()
            .filter(|&u| rng.random::<f64>() < x[u])
            .collect();
        if graph.is_independent(&drawn) {
            return Ok((drawn, rejections));
        }
        rejections += 1;
        if rejections > REJECTION_LIMIT {
            return Err(Error::RejectionLimit { limit: REJECTION_LIMIT });
        }
    }
}

/// Exact sampler for independent `I ⊆ S` with probability `w(I) / sum_J w(J)`.
#[derive(Clone, Debug)]
pub struct WeightedIndependentSetSampler {
    sets: Vec<Vec<EventId>>,
    cumulative: Vec<f64>,
}

impl WeightedIndependentSetSampler {
    pub fn new(graph: &DependencyGraph, vertex_set: &[EventId], x: &XVector) -> Result<Self> {
        let sub = InducedSubgraph::new(graph, vertex_set, DEFAULT_NEIGHBORHOOD_CAP)?;
        if let Some(&v) = sub.vertices.iter().find(|&&v| v >= x.len()) {
            return Err(Error::UnknownEvent(v));
        }
        let mut sets = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for mask in sub.independent_masks() {
            let members = sub.members(mask);
            let w: f64 = sub
                .vertices
                .iter()
                .map(|&u| if members.contains(&u) { x[u] } else { 1.0 - x[u] })
                .product();
            acc += w;
            sets.push(members);
            cumulative.push(acc);
        }
        Ok(WeightedIndependentSetSampler { sets, cumulative })
    }

    pub fn sets(&self) -> &[Vec<EventId>] {
        &self.sets
    }

    /// Normalized probability of each set in [`Self::sets`].
    pub fn probabilities(&self) -> Vec<f64> {
        let total = *self.cumulative.last().expect("the empty set is always present");
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("the empty set is always present");
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.sets.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[EventId] {
        &self.sets[self.sample_index(rng)]
    }
}

pub fn weighted_independent_set_sample<R: Rng + ?Sized>(
    graph: &DependencyGraph,
    vertex_set: &[EventId],
    x: &XVector,
    rng: &mut R,
) -> Result<Vec<EventId>> {
    Ok(WeightedIndependentSetSampler::new(graph, vertex_set, x)?
        .sample(rng)
        .to_vec())
}

fn check_tree_labels(tree: &LabeledRootedTree, params: usize) -> Result<()> {
    match tree.nodes().iter().find(|n| n.label >= params) {
        Some(n) => Err(Error::UnknownEvent(n.label)),
        None => Ok(()),
    }
}

/// Probability that the Moser-Tardos process grows exactly `tree`.
pub fn closed_form_p_t(tree: &LabeledRootedTree, graph: &DependencyGraph, x: &XVector) -> Result<f64> {
    check_tree_labels(tree, x.len())?;
    if !is_proper(tree, graph) {
        return Err(Error::InvalidTree("not a proper witness tree".into()));
    }
    let root = x[tree.root_label()];
    if root <= 0.0 {
        return Err(Error::InvalidParameters("root rate must be positive".into()));
    }
    let product: f64 = tree
        .nodes()
        .iter()
        .map(|n| x[n.label] * graph.neighbors(n.label).iter().map(|&b| 1.0 - x[b]).product::<f64>())
        .product();
    Ok((1.0 - root) / root * product)
}

/// Probability that the improved process grows exactly `tree`.
pub fn closed_form_p_t_prime(tree: &LabeledRootedTree, graph: &DependencyGraph, mu: &MuVector) -> Result<f64> {
    check_tree_labels(tree, mu.len())?;
    if !is_strongly_proper(tree, graph) {
        return Err(Error::InvalidTree("not a strongly proper witness tree".into()));
    }
    let mut z_cache: HashMap<EventId, f64> = HashMap::new();
    let mut product = 1.0 / mu[tree.root_label()];
    for n in tree.nodes() {
        let z = match z_cache.get(&n.label) {
            Some(&z) => z,
            None => {
                let z = independence_polynomial_sum(graph, &graph.inclusive_neighbors(n.label), mu)?;
                z_cache.insert(n.label, z);
                z
            }
        };
        product *= mu[n.label] / z;
    }
    Ok(product)
}

/// `p'_T` written per node before dividing through by
/// `prod_{B in Γ̄(A_v)} (1 - x_B)`: the children's rates times the
/// non-children's complements, over the total weight of the independent
/// subsets of Γ̄(A_v).
pub fn closed_form_p_t_prime_unreduced(tree: &LabeledRootedTree, graph: &DependencyGraph, x: &XVector) -> Result<f64> {
    check_tree_labels(tree, x.len())?;
    if !is_strongly_proper(tree, graph) {
        return Err(Error::InvalidTree("not a strongly proper witness tree".into()));
    }
    let children = tree.children_lists();
    let mut product = 1.0;
    for (v, kids) in children.iter().enumerate() {
        let neighborhood = graph.inclusive_neighbors(tree.nodes()[v].label);
        let kid_labels: Vec<EventId> = kids.iter().map(|&c| tree.nodes()[c].label).collect();
        let numerator: f64 = neighborhood
            .iter()
            .map(|&b| if kid_labels.contains(&b) { x[b] } else { 1.0 - x[b] })
            .product();
        let sub = InducedSubgraph::new(graph, &neighborhood, DEFAULT_NEIGHBORHOOD_CAP)?;
        let denominator: f64 = sub
            .independent_masks()
            .into_iter()
            .map(|mask| {
                let members = sub.members(mask);
                neighborhood
                    .iter()
                    .map(|&b| if members.contains(&b) { x[b] } else { 1.0 - x[b] })
                    .product::<f64>()
            })
            .sum();
        product *= numerator / denominator;
    }
    Ok(product)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeClass {
    /// Sibling labels distinct.
    Proper,
    /// Sibling labels pairwise nonadjacent.
    StronglyProper,
}

#[derive(Debug)]
struct Shape {
    label: EventId,
    children: Vec<Rc<Shape>>,
}

struct Enumerator<'g> {
    graph: &'g DependencyGraph,
    class: TreeClass,
    cap: usize,
    child_sets: HashMap<EventId, Rc<Vec<Vec<EventId>>>>,
    memo: HashMap<(EventId, usize), Rc<Vec<Rc<Shape>>>>,
}

impl Enumerator<'_> {
    fn child_sets(&mut self, label: EventId) -> Result<Rc<Vec<Vec<EventId>>>> {
        if let Some(s) = self.child_sets.get(&label) {
            return Ok(s.clone());
        }
        let neighborhood = self.graph.inclusive_neighbors(label);
        let sets: Vec<Vec<EventId>> = match self.class {
            TreeClass::StronglyProper => {
                let sub = InducedSubgraph::new(self.graph, &neighborhood, DEFAULT_NEIGHBORHOOD_CAP)?;
                sub.independent_masks()
                    .into_iter()
                    .map(|m| sub.members(m))
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            TreeClass::Proper => {
                if neighborhood.len() > DEFAULT_NEIGHBORHOOD_CAP {
                    return Err(Error::NeighborhoodTooLarge {
                        size: neighborhood.len(),
                        cap: DEFAULT_NEIGHBORHOOD_CAP,
                    });
                }
                (1u64..1 << neighborhood.len())
                    .map(|m| {
                        neighborhood
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| m & (1 << i) != 0)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect()
            }
        };
        let sets = Rc::new(sets);
        self.child_sets.insert(label, sets.clone());
        Ok(sets)
    }

    /// Trees rooted at `label` with exactly `size` nodes.
    fn exact(&mut self, label: EventId, size: usize) -> Result<Rc<Vec<Rc<Shape>>>> {
        if let Some(r) = self.memo.get(&(label, size)) {
            return Ok(r.clone());
        }
        let mut out: Vec<Rc<Shape>> = Vec::new();
        if size == 1 {
            out.push(Rc::new(Shape {
                label,
                children: Vec::new(),
            }));
        } else {
            let sets = self.child_sets(label)?;
            for set in sets.iter().filter(|s| s.len() < size) {
                for parts in compositions(size - 1, set.len()) {
                    let mut options = Vec::with_capacity(set.len());
                    for (&child, &n) in set.iter().zip(&parts) {
                        options.push(self.exact(child, n)?);
                    }
                    let mut pick = vec![0usize; options.len()];
                    'product: loop {
                        out.push(Rc::new(Shape {
                            label,
                            children: pick.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect(),
                        }));
                        if out.len() > self.cap {
                            return Err(Error::TooManyTrees { cap: self.cap });
                        }
                        for k in (0..pick.len()).rev() {
                            pick[k] += 1;
                            if pick[k] < options[k].len() {
                                continue 'product;
                            }
                            pick[k] = 0;
                        }
                        break;
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert((label, size), out.clone());
        Ok(out)
    }
}

/// Ordered ways to write `total` as `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(remaining: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=remaining.saturating_sub(parts - 1) {
            prefix.push(first);
            go(remaining - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 && total >= parts {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

fn shape_to_tree(shape: &Shape) -> LabeledRootedTree {
    let mut tree = LabeledRootedTree::leaf(shape.label);
    let mut stack: Vec<(usize, &Shape)> = vec![(0, shape)];
    while let Some((node, s)) = stack.pop() {
        for c in &s.children {
            let id = tree.add_child(node, c.label);
            stack.push((id, c));
        }
    }
    tree
}

/// Every tree of `class` rooted at `root` with at most `max_nodes` nodes,
/// ordered by size, then by canonical encoding. Each tree appears once up to canonical equality.
pub fn enumerate_trees(
    graph: &DependencyGraph,
    root: EventId,
    max_nodes: usize,
    class: TreeClass,
    cap: usize,
) -> Result<Vec<LabeledRootedTree>> {
    if max_nodes == 0 {
        return Err(Error::InvalidArgument("max_nodes must be at least 1".into()));
    }
    if root >= graph.num_vertices() {
        return Err(Error::UnknownEvent(root));
    }
    let mut e = Enumerator {
        graph,
        class,
        cap,
        child_sets: HashMap::new(),
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    for size in 1..=max_nodes {
        let shapes = e.exact(root, size)?;
        if out.len() + shapes.len() > cap {
            return Err(Error::TooManyTrees { cap });
        }
        let mut bucket: Vec<(String, LabeledRootedTree)> = shapes
            .iter()
            .map(|s| {
                let t = shape_to_tree(s);
                (t.canonical_encoding(), t)
            })
            .collect();
        bucket.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(bucket.into_iter().map(|(_, t)| t));
    }
    Ok(out)
}

pub fn enumerate_strongly_proper_trees(
    graph: &DependencyGraph,
    root: EventId,
    max_nodes: usize,
) -> Result<Vec<LabeledRootedTree>> {
    enumerate_trees(
        graph,
        root,
        max_nodes,
        TreeClass::StronglyProper,
        DEFAULT_TREE_COUNT_CAP,
    )
}

pub fn enumerate_proper_trees(
    graph: &DependencyGraph,
    root: EventId,
    max_nodes: usize,
) -> Result<Vec<LabeledRootedTree>> {
    enumerate_trees(graph, root, max_nodes, TreeClass::Proper, DEFAULT_TREE_COUNT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyConfig {
    pub trials: u64,
    pub limits: BranchingLimits,
    pub seed: u64,
}

/// Completed trees by canonical encoding, plus truncation bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeTally {
    pub trials: u64,
    pub counts: BTreeMap<String, u64>,
    pub truncated_depth: u64,
    pub truncated_nodes: u64,
    pub rejection_rounds: u64,
}

impl TreeTally {
    pub fn frequency(&self, encoding: &str) -> f64 {
        self.counts.get(encoding).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn truncation_fraction(&self) -> f64 {
        (self.truncated_depth + self.truncated_nodes) as f64 / self.trials as f64
    }

    pub fn merge(mut self, other: TreeTally) -> TreeTally {
        self.trials += other.trials;
        self.truncated_depth += other.truncated_depth;
        self.truncated_nodes += other.truncated_nodes;
        self.rejection_rounds += other.rejection_rounds;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Runs `config.trials` simulations, trial `i` on stream `(seed, i)`.
/// Chunks run in parallel; the merged tally does not depend on scheduling.
pub fn monte_carlo_tree_tally(
    graph: &DependencyGraph,
    process: Process<'_>,
    root: EventId,
    config: TallyConfig,
) -> Result<TreeTally> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let sim = BranchingSimulator::new(graph, process)?;
    let chunks = config.trials.div_ceil(TALLY_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut tally = TreeTally::default();
            let end = ((chunk + 1) * TALLY_CHUNK).min(config.trials);
            for trial in chunk * TALLY_CHUNK..end {
                let mut rng = rng::stream(config.seed, trial);
                let outcome = sim.simulate(root, config.limits, &mut rng)?;
                tally.trials += 1;
                tally.rejection_rounds += outcome.rejection_rounds;
                match (outcome.tree, outcome.truncation) {
                    (Some(tree), _) => *tally.counts.entry(tree.canonical_encoding()).or_insert(0) += 1,
                    (None, Some(Truncation::NodeCap)) => tally.truncated_nodes += 1,
                    (None, _) => tally.truncated_depth += 1,
                }
            }
            Ok(tally)
        })
        .try_reduce(TreeTally::default, |a, b| Ok(a.merge(b)))
}

/// One enumerated tree compared against its simulated frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeComparison {
    pub encoding: String,
    pub nodes: usize,
    pub closed_form: f64,
    pub frequency: f64,
    /// Binomial standard error at the closed-form probability.
    pub std_err: f64,
    pub z_score: f64,
}

/// Closed form of `tree` under `process`.
pub fn closed_form(process: Process<'_>, tree: &LabeledRootedTree, graph: &DependencyGraph) -> Result<f64> {
    match process {
        Process::MoserTardos(x) => closed_form_p_t(tree, graph, x),
        Process::Improved(mu) => closed_form_p_t_prime(tree, graph, mu),
    }
}

/// Enumerates every tree the process can produce with at most `max_nodes`
/// nodes, simulates `trials` runs (stopping any run past `max_nodes`), and
/// pairs each tree's closed form with its observed frequency.
pub fn compare_with_closed_forms(
    graph: &DependencyGraph,
    process: Process<'_>,
    root: EventId,
    max_nodes: usize,
    trials: u64,
    seed: u64,
) -> Result<(Vec<TreeComparison>, TreeTally)> {
    let class = match process {
        Process::MoserTardos(_) => TreeClass::Proper,
        Process::Improved(_) => TreeClass::StronglyProper,
    };
    let trees = enumerate_trees(graph, root, max_nodes, class, DEFAULT_TREE_COUNT_CAP)?;
    let tally = monte_carlo_tree_tally(
        graph,
        process,
        root,
        TallyConfig {
            trials,
            limits: BranchingLimits {
                depth_cap: max_nodes.max(1),
                node_cap: Some(max_nodes),
            },
            seed,
        },
    )?;
    let rows = trees
        .iter()
        .map(|t| {
            let encoding = t.canonical_encoding();
            let p = closed_form(process, t, graph)?;
            let frequency = tally.frequency(&encoding);
            let std_err = binomial_std_err(p, trials);
            let z_score = if std_err > 0.0 {
                (frequency - p) / std_err
            } else if frequency == p {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(TreeComparison {
                encoding,
                nodes: t.len(),
                closed_form: p,
                frequency,
                std_err,
                z_score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, tally))
}
