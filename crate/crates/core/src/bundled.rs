//! Instances and graphs shipped with the crate for tests and experiments.

use crate::encodings::{cnf_to_instance, hypergraph_to_instance, parse_dimacs, parse_hypergraph};
use crate::model::{DependencyGraph, Event, Instance, Predicate, VarSpec};

/// Bounded-occurrence random 3-SAT: 50 variables, each in at most 2 clauses.
pub const RANDOM_3SAT_DIMACS: &str = include_str!("../data/random3sat_50.cnf");

/// 3-uniform hypergraph on 60 vertices with vertex degree at most 2.
pub const HYPERGRAPH_60: &str = include_str!("../data/hypergraph_60.hg");

pub fn random_3sat() -> Instance {
    cnf_to_instance(&parse_dimacs(RANDOM_3SAT_DIMACS).expect("bundled CNF parses"))
}

pub fn hypergraph_2coloring() -> Instance {
    let h = parse_hypergraph(HYPERGRAPH_60).expect("bundled hypergraph parses");
    hypergraph_to_instance(&h, 2).expect("two colors")
}

/// Five events on a cycle of five variables. Event `i` reads variables `i`
/// and `i + 1 (mod 5)` and is violated when both are "hot": value 1 for the
/// binary variables 1..=4 (weight 0.42), value 2 for the ternary variable 0
/// (weight 0.42). Every event has probability `0.42^2 = 0.1764`.
///
/// The dependency graph is a 5-cycle. The classical condition fails there
/// for every x (at best `4/27 ≈ 0.148`), the cluster condition holds, e.g.
/// with `mu = 1` (bound `1/5`).
pub fn five_cycle() -> Instance {
    let mut variables = vec![VarSpec::new(vec![0.3, 0.28, 0.42]).expect("weights sum to 1")];
    variables.extend((1..5).map(|_| VarSpec::new(vec![0.58, 0.42]).expect("weights sum to 1")));
    let hot = |v: usize| if v == 0 { 2 } else { 1 };
    let events = (0..5)
        .map(|i| {
            let j = (i + 1) % 5;
            Event::new(vec![i, j], Predicate::Forbidden(vec![vec![hot(i), hot(j)]])).expect("valid support")
        })
        .collect();
    Instance::new(variables, events).expect("valid instance")
}

/// Named abstract dependency graphs used by the branching checks.
pub fn test_graph(name: &str) -> Option<DependencyGraph> {
    let edges: &[(usize, usize)] = match name {
        "isolated" => &[],
        "edge" => &[(0, 1)],
        "path3" => &[(0, 1), (1, 2)],
        "triangle" => &[(0, 1), (1, 2), (0, 2)],
        "cycle5" => &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)],
        _ => return None,
    };
    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(1);
    Some(DependencyGraph::from_edges(n, edges).expect("valid edges"))
}

pub const TEST_GRAPH_NAMES: [&str; 5] = ["isolated", "edge", "path3", "triangle", "cycle5"];
