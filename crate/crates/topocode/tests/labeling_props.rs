use proptest::prelude::*;
use topocode::graph_core::{ColoredGraph, Graph};
use topocode::labeling_engine::{
    check_twin_odd_graceful, search, twin_shift, verify, ConstraintSpec, Family, SearchConfig, SearchOutcome,
};

/// Tree from a Prüfer sequence.
fn prufer_tree(code: &[usize]) -> Graph {
    let n = code.len() + 2;
    let mut degree = vec![1; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::new();
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, c));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).unwrap()
}

fn tree(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| prop::collection::vec(0..n, n - 2).prop_map(|c| prufer_tree(&c)))
}

fn free(family: Family) -> ConstraintSpec {
    ConstraintSpec { free: true, ..ConstraintSpec::new(family) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_results_verify(t in tree(8), family in prop_oneof![Just(Family::Graceful), Just(Family::OddGraceful)]) {
        let spec = ConstraintSpec::labeling(family);
        match search(&t, &spec, &SearchConfig::default()).unwrap() {
            SearchOutcome::Found(c) => {
                prop_assert_eq!(&c.graph, &t);
                prop_assert!(verify(&c, &spec).unwrap().pass);
            }
            // Small trees are all graceful and odd-graceful.
            other => prop_assert!(false, "no labeling for {:?}: {:?}", t, other),
        }
    }

    #[test]
    fn twin_shift_gives_twin_pair(t in tree(7)) {
        let spec = ConstraintSpec { set_ordered: true, ..ConstraintSpec::labeling(Family::OddGraceful) };
        let found = search(&t, &spec, &SearchConfig::default()).unwrap().found();
        prop_assume!(found.is_some());
        let f = found.unwrap();
        let h = twin_shift(&f).unwrap();
        let rep = check_twin_odd_graceful(&f, &h).unwrap();
        prop_assert!(rep.pass, "{:?}", rep.violations);
    }
}

proptest! {
    #[test]
    fn edge_magic_translation(t in tree(8), vc in prop::collection::vec(0i64..20, 8), slack in 0i64..10, beta in 0i64..50) {
        let vc = vc[..t.n()].to_vec();
        let c = 40 + slack;
        let ec: Vec<i64> = t.edges().iter().map(|&(u, v)| c - vc[u] - vc[v]).collect();
        let g = ColoredGraph::new(t.clone(), vc.clone(), Some(ec.clone())).unwrap();
        let rep = verify(&g, &free(Family::EdgeMagic)).unwrap();
        prop_assert!(rep.w_ok);
        prop_assert_eq!(rep.constant, Some(c));
        let shifted = ColoredGraph::new(t.clone(), vc.iter().map(|x| x + beta).collect(), Some(ec)).unwrap();
        let rep = verify(&shifted, &free(Family::EdgeMagic)).unwrap();
        prop_assert!(rep.w_ok);
        prop_assert_eq!(rep.constant, Some(c + 2 * beta));
    }

    #[test]
    fn graceful_translation(t in tree(8), vc in prop::collection::vec(0i64..20, 8), beta in 0i64..50) {
        let vc = vc[..t.n()].to_vec();
        let g = ColoredGraph::with_difference_edges(t.clone(), vc.clone());
        let shifted = ColoredGraph::new(t.clone(), vc.iter().map(|x| x + beta).collect(), g.ecolors.clone()).unwrap();
        prop_assert!(verify(&g, &free(Family::Graceful)).unwrap().w_ok);
        prop_assert!(verify(&shifted, &free(Family::Graceful)).unwrap().w_ok);
    }
}
