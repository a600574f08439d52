mod common;

use std::collections::{HashMap, HashSet};

use lll_core::encodings::{cnf_to_instance, random_ksat, CnfFormula};
use lll_core::engine::{find_violated, ViolationTracker};
use lll_core::model::{Event, Instance, Predicate, VarSpec};
use lll_core::witness::{all_witness_trees, build_witness_tree_from_steps, tree_probability_product};
use lll_core::{bundled, is_strongly_proper, rng, DependencyGraph, Engine, SelectionPolicy};
use rand::Rng;

const POLICIES: [SelectionPolicy; 3] = [
    SelectionPolicy::LowestId,
    SelectionPolicy::RandomUniform,
    SelectionPolicy::MostRecentlyInvalidated,
];

#[test]
fn incremental_tracking_matches_full_scan() {
    for seed in 0..100 {
        let inst = common::random_instance(seed, 8, 10);
        let g = DependencyGraph::from_instance(&inst);
        let mut r = rng::stream(seed, 5);
        let mut a = inst.sample_assignment(&mut r);
        let mut tracker = ViolationTracker::new(&inst, &a);
        for _ in 0..1000 {
            let e = r.random_range(0..inst.num_events());
            inst.resample(&mut a, e, &mut r);
            tracker.refresh(&inst, &a, &g.inclusive_neighbors(e));
            assert_eq!(tracker.violated(), &find_violated(&inst, &a), "seed {seed}");
        }
    }
}

#[test]
fn runs_are_sound_and_reproducible() {
    for seed in 0..30 {
        let inst = common::random_instance(seed, 8, 8);
        let engine = Engine::new(&inst);
        for policy in POLICIES {
            let log = engine.run_trial(policy, seed, 3, 2000).unwrap();
            assert_eq!(log.steps.len() as u64, log.counts.iter().sum::<u64>());
            assert_eq!(log.steps.len() as u64, log.steps_used);
            if log.terminated {
                assert!(find_violated(&inst, &log.final_assignment).is_empty());
            }
            let again = engine.run_trial(policy, seed, 3, 2000).unwrap();
            assert_eq!(
                serde_json::to_string(&log).unwrap(),
                serde_json::to_string(&again).unwrap()
            );
        }
    }
}

fn clause_satisfied(clause: &[i64], values: &[usize]) -> bool {
    clause.iter().any(|&lit| {
        let v = values[lit.unsigned_abs() as usize - 1];
        (lit > 0 && v == 1) || (lit < 0 && v == 0)
    })
}

#[test]
fn solutions_satisfy_formulas() {
    for seed in 0..20 {
        let f: CnfFormula = random_ksat(40, 30, 3, 3, seed).unwrap();
        let inst = cnf_to_instance(&f);
        let log = Engine::new(&inst)
            .run_trial(SelectionPolicy::RandomUniform, seed, 0, 100_000)
            .unwrap();
        assert!(log.terminated);
        let values = log.final_assignment.values();
        assert!(f.clauses().iter().all(|c| clause_satisfied(c, values)));
    }
}

#[test]
fn witness_trees_of_random_runs() {
    let mut checked = 0usize;
    for seed in 0..100 {
        let inst = common::random_instance(seed, 6, 6);
        let g = DependencyGraph::from_instance(&inst);
        let log = Engine::new(&inst)
            .run_trial(POLICIES[seed as usize % 3], seed, 0, 300)
            .unwrap();
        let trees = all_witness_trees(&log, &inst).unwrap();
        let mut seen = HashSet::new();
        let mut running = vec![0usize; inst.num_events()];
        for (i, tree) in trees.iter().enumerate() {
            let label = log.steps[i];
            running[label] += 1;
            assert_eq!(tree.root_label(), label);
            assert!(is_strongly_proper(tree, &g), "seed {seed} step {}", i + 1);
            assert_eq!(tree.label_count(label), running[label], "seed {seed} step {}", i + 1);
            assert!(seen.insert(tree.canonical_encoding()), "seed {seed}: repeated tree");
            checked += 1;
        }
    }
    assert!(checked > 500);
}

#[test]
fn witness_examples() {
    let inst = Instance::new(
        vec![VarSpec::fair_coin(); 2],
        vec![
            Event::new(vec![0], Predicate::Clause(vec![true])).unwrap(),
            Event::new(vec![1], Predicate::Clause(vec![true])).unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(
        build_witness_tree_from_steps(&[0], 1, &inst)
            .unwrap()
            .canonical_encoding(),
        "0"
    );
    assert_eq!(
        build_witness_tree_from_steps(&[0, 0], 2, &inst)
            .unwrap()
            .canonical_encoding(),
        "0(0)"
    );
    assert_eq!(
        build_witness_tree_from_steps(&[1, 0], 2, &inst)
            .unwrap()
            .canonical_encoding(),
        "0"
    );
    assert!(build_witness_tree_from_steps(&[1, 0], 3, &inst).is_err());
    assert!(build_witness_tree_from_steps(&[1, 0], 0, &inst).is_err());
}

/// Three clause events on a path of four fair coins.
fn tiny_chain() -> Instance {
    let vars = vec![VarSpec::fair_coin(); 4];
    let events = (0..3)
        .map(|i| Event::new(vec![i, i + 1], Predicate::Clause(vec![true, true])).unwrap())
        .collect();
    Instance::new(vars, events).unwrap()
}

#[test]
fn witness_tree_occurrence_bound() {
    let inst = tiny_chain();
    let g = DependencyGraph::from_instance(&inst);
    let engine = Engine::new(&inst);
    let mut candidates: Vec<String> = Vec::new();
    for root in 0..3 {
        for t in lll_core::branching::enumerate_proper_trees(&g, root, 3).unwrap() {
            candidates.push(t.canonical_encoding());
        }
    }
    let runs = 100_000u64;
    let mut hits: HashMap<&str, u64> = HashMap::new();
    for trial in 0..runs {
        let log = engine.run_trial(SelectionPolicy::LowestId, 17, trial, 10_000).unwrap();
        let occurring: HashSet<String> = all_witness_trees(&log, &inst)
            .unwrap()
            .iter()
            .map(|t| t.canonical_encoding())
            .collect();
        for c in &candidates {
            if occurring.contains(c) {
                *hits.entry(c.as_str()).or_insert(0) += 1;
            }
        }
    }
    for c in &candidates {
        let tree = lll_core::WitnessTree::from_canonical(c).unwrap();
        let bound = tree_probability_product(&tree, &inst).unwrap();
        let f = hits.get(c.as_str()).copied().unwrap_or(0) as f64 / runs as f64;
        let se = (f * (1.0 - f) / runs as f64).sqrt();
        assert!(f <= bound + 3.0 * se, "{c}: frequency {f} above {bound}");
    }
}

#[test]
fn five_cycle_resampling_mean() {
    let inst = bundled::five_cycle();
    let engine = Engine::new(&inst);
    let trials = 2000;
    let mut totals = vec![0u64; 5];
    for t in 0..trials {
        let log = engine.run_trial(SelectionPolicy::LowestId, 5, t, 100_000).unwrap();
        for (acc, c) in totals.iter_mut().zip(&log.counts) {
            *acc += c;
        }
    }
    for total in totals {
        // mu = 1 satisfies the cluster condition for every event.
        assert!((total as f64 / trials as f64) <= 1.0);
    }
}
