#![allow(dead_code)]

use lll_core::model::{Event, Instance, Predicate, VarSpec};
use lll_core::rng;
use lll_core::DependencyGraph;
use rand::seq::index;
use rand::Rng;

/// Random instance with up to `max_vars` small-domain variables and
/// `max_events` events, each forbidding a few random value tuples.
pub fn random_instance(seed: u64, max_vars: usize, max_events: usize) -> Instance {
    let mut rng = rng::stream(seed, 1000);
    let n_vars = rng.random_range(1..=max_vars);
    let variables: Vec<VarSpec> = (0..n_vars)
        .map(|_| {
            let d = rng.random_range(1..=3usize);
            let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|r| r / sum).collect();
            let head: f64 = w[..d - 1].iter().sum();
            w[d - 1] = 1.0 - head;
            VarSpec::new(w).unwrap()
        })
        .collect();
    let n_events = rng.random_range(1..=max_events);
    let events = (0..n_events)
        .map(|_| {
            let k = rng.random_range(1..=n_vars.min(3));
            let vbl: Vec<usize> = index::sample(&mut rng, n_vars, k).into_vec();
            let tuples = (0..rng.random_range(0..3))
                .map(|_| {
                    vbl.iter()
                        .map(|&v| rng.random_range(0..variables[v].domain_size()))
                        .collect()
                })
                .collect();
            Event::new(vbl, Predicate::Forbidden(tuples)).unwrap()
        })
        .collect();
    Instance::new(variables, events).unwrap()
}

/// Erdős–Rényi graph on `n` vertices.
pub fn random_graph(seed: u64, n: usize, p: f64) -> DependencyGraph {
    let mut rng = rng::stream(seed, 2000);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    DependencyGraph::from_edges(n, &edges).unwrap()
}

/// Sum over every subset of `set`, skipping subsets with an adjacent pair.
pub fn naive_independence_polynomial(g: &DependencyGraph, set: &[usize], w: &[f64]) -> f64 {
    let mut total = 0.0;
    for mask in 0u64..(1 << set.len()) {
        let members: Vec<usize> = (0..set.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| set[i])
            .collect();
        let independent = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || !g.adjacent(a, b)));
        if independent {
            total += members.iter().map(|&v| w[v]).product::<f64>();
        }
    }
    total
}
