//! Constructive local lemma toolkit.
//!
//! The [`engine`] runs Moser-Tardos resampling on an [`Instance`]. Its
//! expected work is certified by [`conditions`]: the classical condition
//! bounds the expected resamplings of `A` by `x_A / (1 - x_A)`, the weaker
//! cluster condition by `mu_A`. [`witness`] and [`branching`] implement the
//! objects behind those bounds (witness trees built from execution logs and
//! the two random tree processes) so they can be checked numerically.
//!
//! ```
//! use lll_core::{bundled, uniform_mu_search, ConditionKind, DependencyGraph, Engine, SelectionPolicy};
//!
//! # fn main() -> lll_core::Result<()> {
//! let instance = bundled::five_cycle();
//! let graph = DependencyGraph::from_instance(&instance);
//! let found = uniform_mu_search(&instance, &graph, ConditionKind::Cluster)?.expect("condition holds");
//! let log = Engine::new(&instance).run_trial(SelectionPolicy::LowestId, 42, 0, 1_000_000)?;
//! assert!(log.terminated);
//! assert!(found.mu < 1.0);
//! # Ok(())
//! # }
//! ```

pub mod branching;
pub mod bundled;
pub mod conditions;
pub mod encodings;
pub mod engine;
pub mod error;
pub mod model;
pub mod params;
pub mod rng;
pub mod stats;
pub mod witness;

pub use conditions::{
    check_classical_condition, check_cluster_condition, check_condition, independence_polynomial_sum, mu_from_x,
    uniform_mu_search, x_from_mu, ConditionKind, ConditionReport, MuVector, XVector,
};
pub use engine::{run, Engine, ExecutionLog, SelectionPolicy};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use model::{Assignment, DependencyGraph, Event, EventId, Instance, Predicate, VarId, VarSpec};
pub use witness::{build_witness_tree, is_proper, is_strongly_proper, LabeledRootedTree, WitnessTree};
