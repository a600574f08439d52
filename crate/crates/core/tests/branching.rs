use lll_core::branching::{
    closed_form_p_t, closed_form_p_t_prime, closed_form_p_t_prime_unreduced, compare_with_closed_forms,
    enumerate_proper_trees, enumerate_strongly_proper_trees, monte_carlo_tree_tally, rejection_subprocess,
    BranchingLimits, Process, TallyConfig, WeightedIndependentSetSampler,
};
use lll_core::conditions::{mu_from_x, x_from_mu};
use lll_core::stats::chi_square_two_sample;
use lll_core::witness::tree_probability_product;
use lll_core::{bundled, rng, DependencyGraph, MuVector, WitnessTree, XVector};
use rand::Rng;

fn graphs() -> Vec<(&'static str, DependencyGraph)> {
    bundled::TEST_GRAPH_NAMES
        .iter()
        .map(|&n| (n, bundled::test_graph(n).unwrap()))
        .collect()
}

#[test]
fn mass_is_at_most_one_and_grows_with_the_cap() {
    for (name, g) in graphs() {
        for mu in [1.0 / 3.0, 1.0, 2.0] {
            let mu = MuVector::uniform(g.num_vertices(), mu).unwrap();
            let mut previous = 0.0;
            for cap in 1..=6 {
                let mass: f64 = enumerate_strongly_proper_trees(&g, 0, cap)
                    .unwrap()
                    .iter()
                    .map(|t| closed_form_p_t_prime(t, &g, &mu).unwrap())
                    .sum();
                assert!(mass <= 1.0 + 1e-12, "{name}: mass {mass}");
                assert!(mass >= previous - 1e-15, "{name}: {mass} < {previous}");
                previous = mass;
            }
        }
    }
}

#[test]
fn mt_mass_is_at_most_one() {
    for (name, g) in graphs() {
        let x = XVector::uniform(g.num_vertices(), 0.2).unwrap();
        let mass: f64 = enumerate_proper_trees(&g, 0, 5)
            .unwrap()
            .iter()
            .map(|t| closed_form_p_t(t, &g, &x).unwrap())
            .sum();
        assert!(mass <= 1.0 + 1e-12, "{name}: mass {mass}");
    }
}

#[test]
fn tree_probability_sums_stay_below_mu() {
    // Summing prod p(A_v) over strongly proper trees rooted at A stays
    // below mu_A when the cluster condition holds.
    let inst = bundled::five_cycle();
    let g = DependencyGraph::from_instance(&inst);
    let mut partial = Vec::new();
    for cap in 1..=9 {
        let s: f64 = enumerate_strongly_proper_trees(&g, 0, cap)
            .unwrap()
            .iter()
            .map(|t| tree_probability_product(t, &inst).unwrap())
            .sum();
        partial.push(s);
    }
    assert!(partial.windows(2).all(|w| w[1] >= w[0]));
    let last = *partial.last().unwrap();
    assert!(last <= 1.0, "partial sums {partial:?}");
    // Increments shrink, so the sums are settling.
    let steps: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps[steps.len() - 1] < steps[2]);
}

fn random_tree(g: &DependencyGraph, rng: &mut impl Rng, nodes: usize) -> WitnessTree {
    let mut tree = WitnessTree::leaf(rng.random_range(0..g.num_vertices()));
    for _ in 1..nodes {
        let parent = rng.random_range(0..tree.len());
        let label = tree.nodes()[parent].label;
        let kids: Vec<usize> = tree.children_lists()[parent]
            .iter()
            .map(|&c| tree.nodes()[c].label)
            .collect();
        let options: Vec<usize> = g
            .inclusive_neighbors(label)
            .into_iter()
            .filter(|&c| kids.iter().all(|&k| k != c && !g.adjacent(k, c)))
            .collect();
        if !options.is_empty() {
            tree.add_child(parent, options[rng.random_range(0..options.len())]);
        }
    }
    tree
}

#[test]
fn reduced_and_unreduced_forms_agree() {
    let mut r = rng::stream(11, 0);
    for (_, g) in graphs() {
        for _ in 0..200 {
            let x = XVector::new((0..g.num_vertices()).map(|_| r.random_range(0.01..0.95)).collect()).unwrap();
            let mu = mu_from_x(&x).unwrap();
            let nodes = r.random_range(1..8);
            let tree = random_tree(&g, &mut r, nodes);
            let reduced = closed_form_p_t_prime(&tree, &g, &mu).unwrap();
            let unreduced = closed_form_p_t_prime_unreduced(&tree, &g, &x).unwrap();
            assert!((reduced - unreduced).abs() <= 1e-10 * reduced);
        }
    }
}

#[test]
fn edgeless_neighborhoods_match_the_mt_process() {
    let g = bundled::test_graph("isolated").unwrap();
    let mu = MuVector::uniform(1, 1.0).unwrap();
    let x = x_from_mu(&mu);
    for t in enumerate_strongly_proper_trees(&g, 0, 5).unwrap() {
        let a = closed_form_p_t(&t, &g, &x).unwrap();
        let b = closed_form_p_t_prime(&t, &g, &mu).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn small_trees_match_simulation() {
    for (name, g) in graphs() {
        let mu = MuVector::uniform(g.num_vertices(), 1.0).unwrap();
        let x = x_from_mu(&mu);
        for process in [Process::MoserTardos(&x), Process::Improved(&mu)] {
            let (rows, tally) = compare_with_closed_forms(&g, process, 0, 3, 100_000, 21).unwrap();
            assert_eq!(tally.trials, 100_000);
            for row in rows {
                assert!(row.z_score.abs() <= 4.0, "{name} {:?}: {row:?}", process.kind());
            }
        }
    }
}

#[test]
fn zero_rates_give_the_bare_root() {
    let g = bundled::test_graph("triangle").unwrap();
    let x = XVector::allowing_zero(vec![0.0; 3]).unwrap();
    let tally = monte_carlo_tree_tally(
        &g,
        Process::MoserTardos(&x),
        1,
        TallyConfig {
            trials: 1000,
            limits: BranchingLimits::default(),
            seed: 0,
        },
    )
    .unwrap();
    assert_eq!(tally.frequency("1"), 1.0);
}

#[test]
fn tallies_do_not_depend_on_chunking() {
    let g = bundled::test_graph("path3").unwrap();
    let mu = MuVector::uniform(3, 0.5).unwrap();
    let config = |trials| TallyConfig {
        trials,
        limits: BranchingLimits::default(),
        seed: 4,
    };
    let a = monte_carlo_tree_tally(&g, Process::Improved(&mu), 1, config(10_000)).unwrap();
    let b = monte_carlo_tree_tally(&g, Process::Improved(&mu), 1, config(10_000)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejection_matches_direct_sampler() {
    let draws = 100_000;
    for (name, g) in graphs() {
        let x = XVector::uniform(g.num_vertices(), 0.4).unwrap();
        for v in 0..g.num_vertices() {
            let nb = g.inclusive_neighbors(v);
            let sampler = WeightedIndependentSetSampler::new(&g, &nb, &x).unwrap();
            let mut direct = vec![0u64; sampler.sets().len()];
            let mut rejected = vec![0u64; sampler.sets().len()];
            let mut r1 = rng::stream(v as u64, 1);
            let mut r2 = rng::stream(v as u64, 2);
            for _ in 0..draws {
                direct[sampler.sample_index(&mut r1)] += 1;
                let (set, _) = rejection_subprocess(&g, &nb, &x, &mut r2).unwrap();
                let idx = sampler.sets().iter().position(|s| *s == set).unwrap();
                rejected[idx] += 1;
            }
            let test = chi_square_two_sample(&direct, &rejected);
            assert!(test.p_value > 0.001, "{name} vertex {v}: {test:?}");
        }
    }
}
