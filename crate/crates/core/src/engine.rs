//! The Moser-Tardos resampling procedure.
//!
//! Sample every variable, then while some event is violated pick one
//! according to a [`SelectionPolicy`] and redraw every variable in its
//! support. Violations are tracked incrementally: after resampling `A` only
//! events in Γ̄(A) can change status.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Assignment, DependencyGraph, EventId, Instance};
use crate::rng::{self, StreamRng};

/// How the next event is chosen when several are violated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    #[default]
    LowestId,
    RandomUniform,
    /// The event whose violation was observed most recently, i.e. the one
    /// found violated on the latest recheck after its support changed.
    /// Ties go to the lowest id.
    MostRecentlyInvalidated,
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionPolicy::LowestId => "lowest-id",
            SelectionPolicy::RandomUniform => "random-uniform",
            SelectionPolicy::MostRecentlyInvalidated => "most-recently-invalidated",
        })
    }
}

impl FromStr for SelectionPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-id" => Ok(SelectionPolicy::LowestId),
            "random-uniform" => Ok(SelectionPolicy::RandomUniform),
            "most-recently-invalidated" => Ok(SelectionPolicy::MostRecentlyInvalidated),
            other => Err(Error::InvalidArgument(format!("unknown policy {other:?}"))),
        }
    }
}

/// The record of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLog {
    /// Resampled events in order.
    pub steps: Vec<EventId>,
    /// `counts[A]` is `N_A`, the number of times `A` was resampled.
    pub counts: Vec<u64>,
    pub final_assignment: Assignment,
    pub terminated: bool,
    pub steps_used: u64,
}

/// `max(10^6, 100 * ceil(total_bound))`.
pub fn default_max_steps(total_bound: f64) -> u64 {
    let scaled = 100.0 * total_bound.max(0.0).ceil();
    if scaled.is_finite() && scaled > 1e6 {
        scaled as u64
    } else {
        1_000_000
    }
}

/// Full scan for violated events.
pub fn find_violated(instance: &Instance, assignment: &Assignment) -> BTreeSet<EventId> {
    instance
        .events()
        .iter()
        .enumerate()
        .filter(|(_, e)| model::violated(assignment, e))
        .map(|(id, _)| id)
        .collect()
}

/// Incrementally maintained set of violated events.
#[derive(Clone, Debug)]
pub struct ViolationTracker {
    violated: BTreeSet<EventId>,
    stamps: Vec<u64>,
    clock: u64,
}

impl ViolationTracker {
    pub fn new(instance: &Instance, assignment: &Assignment) -> Self {
        ViolationTracker {
            violated: find_violated(instance, assignment),
            stamps: vec![0; instance.num_events()],
            clock: 0,
        }
    }

    pub fn violated(&self) -> &BTreeSet<EventId> {
        &self.violated
    }

    /// Rechecks `dirty`, which must contain every event whose support
    /// intersects a variable changed since the previous refresh. Events not
    /// in `dirty` keep their status.
    pub fn refresh(&mut self, instance: &Instance, assignment: &Assignment, dirty: &[EventId]) -> &BTreeSet<EventId> {
        self.clock += 1;
        for &e in dirty {
            if model::violated(assignment, &instance.events()[e]) {
                self.violated.insert(e);
                self.stamps[e] = self.clock;
            } else {
                self.violated.remove(&e);
            }
        }
        &self.violated
    }

    fn select<R: Rng + ?Sized>(&self, policy: SelectionPolicy, rng: &mut R) -> Option<EventId> {
        match policy {
            SelectionPolicy::LowestId => self.violated.first().copied(),
            SelectionPolicy::RandomUniform => {
                if self.violated.is_empty() {
                    None
                } else {
                    let k = rng.random_range(0..self.violated.len());
                    self.violated.iter().nth(k).copied()
                }
            }
            SelectionPolicy::MostRecentlyInvalidated => self
                .violated
                .iter()
                .copied()
                .max_by(|&a, &b| self.stamps[a].cmp(&self.stamps[b]).then(b.cmp(&a))),
        }
    }
}

/// An instance bundled with its dependency graph, ready for repeated runs.
#[derive(Clone, Debug)]
pub struct Engine<'a> {
    instance: &'a Instance,
    graph: DependencyGraph,
    neighborhoods: Vec<Vec<EventId>>,
}

impl<'a> Engine<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let graph = DependencyGraph::from_instance(instance);
        let neighborhoods = (0..instance.num_events())
            .map(|a| graph.inclusive_neighbors(a))
            .collect();
        Engine {
            instance,
            graph,
            neighborhoods,
        }
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    /// One run on stream `(seed, trial)`.
    pub fn run_trial(&self, policy: SelectionPolicy, seed: u64, trial: u64, max_steps: u64) -> Result<ExecutionLog> {
        if max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        let mut rng = rng::stream(seed, trial);
        Ok(self.run_with_rng(policy, max_steps, &mut rng))
    }

    pub fn run_with_rng(&self, policy: SelectionPolicy, max_steps: u64, rng: &mut StreamRng) -> ExecutionLog {
        let instance = self.instance;
        let mut assignment = instance.sample_assignment(rng);
        let mut tracker = ViolationTracker::new(instance, &assignment);
        let mut steps = Vec::new();
        let mut counts = vec![0u64; instance.num_events()];
        let mut steps_used = 0u64;
        let terminated = loop {
            let Some(event) = tracker.select(policy, rng) else {
                break true;
            };
            if steps_used == max_steps {
                break false;
            }
            instance.resample(&mut assignment, event, rng);
            steps.push(event);
            counts[event] += 1;
            steps_used += 1;
            tracker.refresh(instance, &assignment, &self.neighborhoods[event]);
        };
        ExecutionLog {
            steps,
            counts,
            final_assignment: assignment,
            terminated,
            steps_used,
        }
    }
}

/// Runs the procedure once with stream `(seed, 0)`.
pub fn run(instance: &Instance, policy: SelectionPolicy, seed: u64, max_steps: u64) -> Result<ExecutionLog> {
    Engine::new(instance).run_trial(policy, seed, 0, max_steps)
}
