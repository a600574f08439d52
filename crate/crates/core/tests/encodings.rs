use lll_core::encodings::{
    cnf_to_instance, hypergraph_to_instance, parse_dimacs, parse_hypergraph, random_hypergraph, random_ksat,
    CnfFormula, Hypergraph,
};
use lll_core::params::{format_parameters, parse_parameters};
use lll_core::{bundled, DependencyGraph, ParseErrorKind};
use proptest::prelude::*;

fn formula_strategy() -> impl Strategy<Value = CnfFormula> {
    (1usize..12).prop_flat_map(|n| {
        let clause = proptest::sample::subsequence((1..=n as i64).collect::<Vec<_>>(), 1..=n.min(4))
            .prop_flat_map(|vars| {
                let len = vars.len();
                (Just(vars), proptest::collection::vec(any::<bool>(), len))
            })
            .prop_map(|(vars, signs)| {
                vars.into_iter()
                    .zip(signs)
                    .map(|(v, s)| if s { v } else { -v })
                    .collect::<Vec<i64>>()
            });
        proptest::collection::vec(clause, 0..10).prop_map(move |cs| CnfFormula::new(n, cs).unwrap())
    })
}

proptest! {
    #[test]
    fn dimacs_round_trip(f in formula_strategy()) {
        let text = f.to_dimacs();
        let parsed = parse_dimacs(&text).unwrap();
        prop_assert_eq!(&parsed, &f);
        prop_assert_eq!(parse_dimacs(&parsed.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn hypergraph_round_trip(seed in 0u64..5000, n in 6usize..30, m in 1usize..8) {
        if let Ok(h) = random_hypergraph(n, m, 3, 3, seed) {
            let parsed = parse_hypergraph(&h.to_text()).unwrap();
            prop_assert_eq!(parsed, h);
        }
    }

    #[test]
    fn parameters_round_trip(values in proptest::collection::vec(1e-9f64..1e9, 0..20)) {
        prop_assert_eq!(parse_parameters(&format_parameters(&values)).unwrap(), values);
    }

    #[test]
    fn parsers_never_panic(text in "[ -~\n]{0,200}") {
        let _ = parse_dimacs(&text);
        let _ = parse_hypergraph(&text);
        let _ = parse_parameters(&text);
        let _ = lll_core::WitnessTree::from_canonical(&text);
    }
}

#[test]
fn generated_formulas_respect_caps() {
    for seed in 0..50 {
        for (n, m, k, occ) in [(30, 20, 3, 2), (50, 40, 3, 3), (20, 10, 4, 2), (10, 10, 3, 3)] {
            let f = random_ksat(n, m, k, occ, seed).unwrap();
            assert_eq!(f.clauses().len(), m);
            assert!(f.clauses().iter().all(|c| c.len() == k));
            // Direct count, independent of CnfFormula::occurrences.
            let mut counts = vec![0usize; n];
            for c in f.clauses() {
                for l in c {
                    counts[l.unsigned_abs() as usize - 1] += 1;
                }
            }
            assert!(counts.iter().all(|&c| c <= occ));
            assert_eq!(counts, f.occurrences());
            let g = DependencyGraph::from_instance(&cnf_to_instance(&f));
            assert!(g.max_degree() <= k * (occ - 1));
            assert_eq!(random_ksat(n, m, k, occ, seed).unwrap(), f);
        }
    }
}

#[test]
fn generated_hypergraphs_respect_caps() {
    for seed in 0..50 {
        let h = random_hypergraph(40, 20, 3, 2, seed).unwrap();
        assert!(h.degrees().iter().all(|&d| d <= 2));
        assert!(h.edges().iter().all(|e| e.len() == 3));
        let g = DependencyGraph::from_instance(&hypergraph_to_instance(&h, 2).unwrap());
        assert!(g.max_degree() <= 3);
    }
}

#[test]
fn single_occurrence_gives_edgeless_graph() {
    let f = random_ksat(30, 10, 3, 1, 9).unwrap();
    assert_eq!(DependencyGraph::from_instance(&cnf_to_instance(&f)).num_edges(), 0);
    let h = random_hypergraph(30, 10, 3, 1, 9).unwrap();
    assert_eq!(
        DependencyGraph::from_instance(&hypergraph_to_instance(&h, 2).unwrap()).num_edges(),
        0
    );
}

#[test]
fn infeasible_caps_are_reported() {
    assert!(random_ksat(10, 20, 3, 2, 0).is_err());
    assert!(random_hypergraph(10, 20, 3, 2, 0).is_err());
}

#[test]
fn event_probabilities() {
    let f = parse_dimacs("p cnf 4 2\n1 -2 3 0\n-3 4 0\n").unwrap();
    let inst = cnf_to_instance(&f);
    assert_eq!(inst.probabilities().unwrap(), vec![0.125, 0.25]);
    let h = Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3, 4, 0]]).unwrap();
    assert_eq!(
        hypergraph_to_instance(&h, 2).unwrap().probabilities().unwrap(),
        vec![0.25, 0.125]
    );
    let three = hypergraph_to_instance(&h, 3).unwrap().probabilities().unwrap();
    assert!((three[0] - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn parse_errors_carry_lines() {
    let e = parse_dimacs("c hi\np cnf 1 1\n1 -1 0\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(matches!(e.kind, ParseErrorKind::Tautology(_)));
    let e = parse_dimacs("p cnf 3 3\n1 0\n2 0\n").unwrap_err();
    assert!(matches!(
        e.kind,
        ParseErrorKind::ClauseCountMismatch { declared: 3, found: 2 }
    ));
    let e = parse_hypergraph("0 1\n\n1 1\n").unwrap_err();
    assert_eq!(e.line, 3);
}

#[test]
fn bundled_files_parse() {
    let f = parse_dimacs(bundled::RANDOM_3SAT_DIMACS).unwrap();
    assert_eq!(f.num_vars(), 50);
    let h = parse_hypergraph(bundled::HYPERGRAPH_60).unwrap();
    assert_eq!(h.num_vertices(), 60);
}
