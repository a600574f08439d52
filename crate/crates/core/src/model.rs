//! Variables, events, assignments and the variable-sharing dependency graph.
//!
//! Variable and event identifiers are dense indices: variable `i` is
//! `instance.variables()[i]`, event `j` is `instance.events()[j]`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VarId = usize;
pub type EventId = usize;

/// Default cap on the number of joint values enumerated by
/// [`Instance::event_probability`].
pub const DEFAULT_PROBABILITY_CAP: u128 = 1 << 24;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A finite discrete random variable with an explicit distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    weights: Vec<f64>,
}

impl VarSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights).map_err(|reason| Error::InvalidVariable { var: 0, reason })?;
        Ok(VarSpec { weights })
    }

    pub fn uniform(domain_size: usize) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::InvalidVariable {
                var: 0,
                reason: "domain size must be at least 1".into(),
            });
        }
        Ok(VarSpec {
            weights: vec![1.0 / domain_size as f64; domain_size],
        })
    }

    /// A fair coin: values 0 and 1 with probability 1/2 each.
    pub fn fair_coin() -> Self {
        VarSpec {
            weights: vec![0.5, 0.5],
        }
    }

    fn validate(weights: &[f64]) -> std::result::Result<(), String> {
        if weights.is_empty() {
            return Err("domain size must be at least 1".into());
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(format!("weight {w} is not a nonnegative finite number"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE * sum.max(1.0) {
            return Err(format!("weights sum to {sum}, expected 1"));
        }
        Ok(())
    }

    pub fn domain_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Draws one value from the weight vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.weights.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (value, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return value;
            }
        }
        // u landed in the rounding gap above the last partial sum.
        self.weights
            .iter()
            .rposition(|w| *w > 0.0)
            .unwrap_or(self.weights.len() - 1)
    }
}

/// Evaluator for [`Predicate::Custom`].
pub type PredicateFn = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Violation predicate of an event, evaluated on the values of its `vbl`
/// variables in the order they are listed.
#[derive(Clone)]
pub enum Predicate {
    /// Disjunction of literals over binary variables. `signs[i]` is `true`
    /// for a positive literal on `vbl[i]` (satisfied by value 1). Violated iff
    /// every literal is false.
    Clause(Vec<bool>),
    /// Violated iff all variables take the same value.
    Monochromatic,
    /// Violated iff the value tuple is one of the listed tuples.
    Forbidden(Vec<Vec<usize>>),
    /// Never violated.
    Never,
    /// Arbitrary evaluator.
    Custom(PredicateFn),
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Clause(signs) => f.debug_tuple("Clause").field(signs).finish(),
            Predicate::Monochromatic => f.write_str("Monochromatic"),
            Predicate::Forbidden(t) => f.debug_tuple("Forbidden").field(t).finish(),
            Predicate::Never => f.write_str("Never"),
            Predicate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Predicate {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[usize]) -> bool + Send + Sync + 'static,
    {
        Predicate::Custom(Arc::new(f))
    }

    fn evaluate(&self, values: &[usize]) -> bool {
        match self {
            Predicate::Clause(signs) => signs.iter().zip(values).all(|(&positive, &v)| (v == 1) != positive),
            Predicate::Monochromatic => values.windows(2).all(|w| w[0] == w[1]),
            Predicate::Forbidden(tuples) => tuples.iter().any(|t| t.as_slice() == values),
            Predicate::Never => false,
            Predicate::Custom(f) => f(values),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Event {
    vbl: Vec<VarId>,
    sorted_vbl: Vec<VarId>,
    predicate: Predicate,
}

impl Event {
    pub fn new(vbl: Vec<VarId>, predicate: Predicate) -> Result<Self> {
        let mut sorted_vbl = vbl.clone();
        sorted_vbl.sort_unstable();
        let duplicate = sorted_vbl.windows(2).any(|w| w[0] == w[1]);
        if vbl.is_empty() || duplicate {
            return Err(Error::InvalidEvent {
                event: 0,
                reason: if duplicate {
                    "vbl contains a duplicate variable".into()
                } else {
                    "vbl is empty".into()
                },
            });
        }
        Ok(Event {
            vbl,
            sorted_vbl,
            predicate,
        })
    }

    pub fn vbl(&self) -> &[VarId] {
        &self.vbl
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    /// True iff the supports share at least one variable. An event always
    /// overlaps itself.
    pub fn overlaps(&self, other: &Event) -> bool {
        sorted_intersect(&self.sorted_vbl, &other.sorted_vbl)
    }
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// A total evaluation of the instance's variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(instance: &Instance, values: Vec<usize>) -> Result<Self> {
        if values.len() != instance.num_variables() {
            return Err(Error::InvalidAssignment(format!(
                "expected {} values, got {}",
                instance.num_variables(),
                values.len()
            )));
        }
        for (var, (&v, spec)) in values.iter().zip(instance.variables()).enumerate() {
            if v >= spec.domain_size() {
                return Err(Error::InvalidAssignment(format!(
                    "variable {var} has value {v} outside domain of size {}",
                    spec.domain_size()
                )));
            }
        }
        Ok(Assignment(values))
    }

    pub fn value(&self, var: VarId) -> usize {
        self.0[var]
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn set(&mut self, var: VarId, value: usize) {
        self.0[var] = value;
    }
}

/// Independent variables plus the family of bad events defined over them.
#[derive(Clone, Debug)]
pub struct Instance {
    variables: Vec<VarSpec>,
    events: Vec<Event>,
    occurrences: Vec<Vec<EventId>>,
}

impl Instance {
    pub fn new(variables: Vec<VarSpec>, events: Vec<Event>) -> Result<Self> {
        let mut occurrences = vec![Vec::new(); variables.len()];
        for (id, event) in events.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidEvent { event: id, reason };
            for &var in &event.vbl {
                if var >= variables.len() {
                    return Err(invalid(format!("references unknown variable {var}")));
                }
                occurrences[var].push(id);
            }
            match &event.predicate {
                Predicate::Clause(signs) => {
                    if signs.len() != event.vbl.len() {
                        return Err(invalid(format!(
                            "clause has {} signs for {} variables",
                            signs.len(),
                            event.vbl.len()
                        )));
                    }
                    if let Some(&var) = event.vbl.iter().find(|&&v| variables[v].domain_size() != 2) {
                        return Err(invalid(format!("clause variable {var} is not binary")));
                    }
                }
                Predicate::Forbidden(tuples) => {
                    for t in tuples {
                        let fits = t.len() == event.vbl.len()
                            && t.iter()
                                .zip(&event.vbl)
                                .all(|(&v, &var)| v < variables[var].domain_size());
                        if !fits {
                            return Err(invalid(format!(
                                "forbidden tuple {t:?} does not match the support domains"
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(Instance {
            variables,
            events,
            occurrences,
        })
    }

    pub fn variables(&self) -> &[VarSpec] {
        &self.variables
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn event(&self, id: EventId) -> Result<&Event> {
        self.events.get(id).ok_or(Error::UnknownEvent(id))
    }

    /// Events whose support contains `var`, in increasing id order.
    pub fn events_on(&self, var: VarId) -> &[EventId] {
        &self.occurrences[var]
    }

    /// Shared-variable overlap; `overlaps(a, a)` is true.
    pub fn overlaps(&self, a: EventId, b: EventId) -> bool {
        a == b || self.events[a].overlaps(&self.events[b])
    }

    pub fn is_violated(&self, assignment: &Assignment, event: EventId) -> Result<bool> {
        let e = self.event(event)?;
        if assignment.0.len() != self.variables.len() {
            return Err(Error::InvalidAssignment(format!(
                "expected {} values, got {}",
                self.variables.len(),
                assignment.0.len()
            )));
        }
        Ok(violated(assignment, e))
    }

    /// Exact violation probability under the product measure.
    pub fn event_probability(&self, event: EventId) -> Result<f64> {
        self.event_probability_with_cap(event, DEFAULT_PROBABILITY_CAP)
    }

    pub fn event_probability_with_cap(&self, event: EventId, cap: u128) -> Result<f64> {
        let e = self.event(event)?;
        let domains: Vec<usize> = e.vbl.iter().map(|&v| self.variables[v].domain_size()).collect();
        let joint_values = domains
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .unwrap_or(u128::MAX);
        if joint_values > cap {
            return Err(Error::SupportTooLarge {
                event,
                joint_values,
                cap,
            });
        }
        if let Predicate::Never = e.predicate {
            return Ok(0.0);
        }
        // Mixed-radix walk over every joint value of vbl(A).
        let mut values = vec![0usize; domains.len()];
        let mut total = 0.0;
        loop {
            if e.predicate.evaluate(&values) {
                total += values
                    .iter()
                    .zip(&e.vbl)
                    .map(|(&v, &var)| self.variables[var].weights[v])
                    .product::<f64>();
            }
            let mut pos = 0;
            loop {
                if pos == values.len() {
                    return Ok(total.min(1.0));
                }
                values[pos] += 1;
                if values[pos] < domains[pos] {
                    break;
                }
                values[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn probabilities(&self) -> Result<Vec<f64>> {
        (0..self.num_events()).map(|e| self.event_probability(e)).collect()
    }

    pub fn sample_assignment<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        Assignment(self.variables.iter().map(|v| v.sample(rng)).collect())
    }

    /// Draws fresh values for every variable in `vbl(event)`.
    pub fn resample<R: Rng + ?Sized>(&self, assignment: &mut Assignment, event: EventId, rng: &mut R) {
        for &var in &self.events[event].vbl {
            assignment.0[var] = self.variables[var].sample(rng);
        }
    }
}

pub(crate) fn violated(assignment: &Assignment, e: &Event) -> bool {
    match &e.predicate {
        Predicate::Clause(signs) => signs
            .iter()
            .zip(&e.vbl)
            .all(|(&positive, &var)| (assignment.0[var] == 1) != positive),
        Predicate::Monochromatic => {
            let first = assignment.0[e.vbl[0]];
            e.vbl[1..].iter().all(|&var| assignment.0[var] == first)
        }
        Predicate::Never => false,
        p => {
            let values: Vec<usize> = e.vbl.iter().map(|&var| assignment.0[var]).collect();
            p.evaluate(&values)
        }
    }
}

/// Dependency graph over events: `A ~ B` iff `A != B` and their supports
/// intersect. Neighbor lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    adjacency: Vec<Vec<EventId>>,
}

impl DependencyGraph {
    pub fn from_instance(instance: &Instance) -> Self {
        let mut adjacency = vec![Vec::new(); instance.num_events()];
        for events in &instance.occurrences {
            for (i, &a) in events.iter().enumerate() {
                for &b in &events[i + 1..] {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        DependencyGraph { adjacency }
    }

    /// Builds an abstract graph on `n` vertices. Self-loops are rejected;
    /// repeated edges are merged.
    pub fn from_edges(n: usize, edges: &[(EventId, EventId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(DependencyGraph { adjacency })
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Open neighborhood Γ(A).
    pub fn neighbors(&self, event: EventId) -> &[EventId] {
        &self.adjacency[event]
    }

    /// Inclusive neighborhood Γ̄(A) = Γ(A) ∪ {A}, sorted.
    pub fn inclusive_neighbors(&self, event: EventId) -> Vec<EventId> {
        let open = &self.adjacency[event];
        let pos = open.partition_point(|&b| b < event);
        let mut out = Vec::with_capacity(open.len() + 1);
        out.extend_from_slice(&open[..pos]);
        out.push(event);
        out.extend_from_slice(&open[pos..]);
        out
    }

    pub fn adjacent(&self, a: EventId, b: EventId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Overlap as used by witness trees: adjacency or equality.
    pub fn overlaps(&self, a: EventId, b: EventId) -> bool {
        a == b || self.adjacent(a, b)
    }

    /// True iff no two listed vertices are adjacent.
    pub fn is_independent(&self, vertices: &[EventId]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| !self.adjacent(a, b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EventId, EventId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clause(vbl: &[usize], signs: &[bool]) -> Event {
        Event::new(vbl.to_vec(), Predicate::Clause(signs.to_vec())).unwrap()
    }

    fn coins(n: usize) -> Vec<VarSpec> {
        vec![VarSpec::fair_coin(); n]
    }

    #[test]
    fn disjoint_supports_give_edgeless_graph() {
        let inst = Instance::new(
            coins(4),
            vec![clause(&[0, 1], &[true, true]), clause(&[2, 3], &[true, false])],
        )
        .unwrap();
        let g = DependencyGraph::from_instance(&inst);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn single_event_graph() {
        let inst = Instance::new(coins(1), vec![clause(&[0], &[true])]).unwrap();
        let g = DependencyGraph::from_instance(&inst);
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.inclusive_neighbors(0), vec![0]);
    }

    #[test]
    fn three_clauses_one_shared_variable() {
        // variables {1,2},{2,3},{4} with 1-based names
        let inst = Instance::new(
            coins(4),
            vec![
                clause(&[0, 1], &[true, true]),
                clause(&[1, 2], &[true, true]),
                clause(&[3], &[true]),
            ],
        )
        .unwrap();
        let g = DependencyGraph::from_instance(&inst);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.inclusive_neighbors(1), vec![0, 1]);
    }

    #[test]
    fn clause_violation() {
        let inst = Instance::new(coins(3), vec![clause(&[0, 1], &[true, true])]).unwrap();
        let a = Assignment::new(&inst, vec![0, 0, 1]).unwrap();
        assert!(inst.is_violated(&a, 0).unwrap());
        for other in 0..2 {
            let a = Assignment::new(&inst, vec![1, 0, other]).unwrap();
            assert!(!inst.is_violated(&a, 0).unwrap());
        }
        assert_eq!(inst.is_violated(&a, 7), Err(Error::UnknownEvent(7)));
    }

    #[test]
    fn monochromatic_edge() {
        let vars = vec![VarSpec::uniform(2).unwrap(); 3];
        let inst = Instance::new(vars, vec![Event::new(vec![0, 1, 2], Predicate::Monochromatic).unwrap()]).unwrap();
        let a = Assignment::new(&inst, vec![0, 0, 1]).unwrap();
        assert!(!inst.is_violated(&a, 0).unwrap());
        let a = Assignment::new(&inst, vec![1, 1, 1]).unwrap();
        assert!(inst.is_violated(&a, 0).unwrap());
        assert_eq!(inst.event_probability(0).unwrap(), 0.25);
    }

    #[test]
    fn probabilities_of_simple_events() {
        let inst = Instance::new(
            coins(3),
            vec![
                Event::new(vec![0], Predicate::Never).unwrap(),
                clause(&[0, 1, 2], &[true, false, true]),
                Event::new(vec![1, 2], Predicate::custom(|_| false)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(inst.event_probability(0).unwrap(), 0.0);
        assert_eq!(inst.event_probability(1).unwrap(), 0.125);
        assert_eq!(inst.event_probability(2).unwrap(), 0.0);
    }

    #[test]
    fn weighted_forbidden_probability() {
        let vars = vec![
            VarSpec::new(vec![0.3, 0.28, 0.42]).unwrap(),
            VarSpec::new(vec![0.58, 0.42]).unwrap(),
        ];
        let ev = Event::new(vec![0, 1], Predicate::Forbidden(vec![vec![2, 1], vec![0, 0]])).unwrap();
        let inst = Instance::new(vars, vec![ev]).unwrap();
        let p = inst.event_probability(0).unwrap();
        assert!((p - (0.42 * 0.42 + 0.3 * 0.58)).abs() < 1e-15);
    }

    #[test]
    fn probability_cap_is_enforced() {
        let vars = vec![VarSpec::uniform(16).unwrap(); 7];
        let ev = Event::new((0..7).collect(), Predicate::Monochromatic).unwrap();
        let inst = Instance::new(vars, vec![ev]).unwrap();
        // 16^7 = 2^28 > 2^24
        assert!(matches!(
            inst.event_probability(0),
            Err(Error::SupportTooLarge { event: 0, .. })
        ));
        assert!(inst.event_probability_with_cap(0, 1 << 30).is_ok());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(VarSpec::new(vec![]).is_err());
        assert!(VarSpec::new(vec![0.5, 0.4]).is_err());
        assert!(VarSpec::new(vec![1.5, -0.5]).is_err());
        assert!(Event::new(vec![], Predicate::Never).is_err());
        assert!(Event::new(vec![1, 1], Predicate::Never).is_err());
        assert!(Instance::new(coins(1), vec![clause(&[3], &[true])]).is_err());
        assert!(Instance::new(coins(2), vec![clause(&[0, 1], &[true])]).is_err());
        let ternary = vec![VarSpec::uniform(3).unwrap()];
        assert!(Instance::new(ternary, vec![clause(&[0], &[true])]).is_err());
        assert!(DependencyGraph::from_edges(2, &[(0, 0)]).is_err());
        assert!(DependencyGraph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn sampling_respects_zero_weights() {
        let v = VarSpec::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| v.sample(&mut rng) == 1));
    }
}
