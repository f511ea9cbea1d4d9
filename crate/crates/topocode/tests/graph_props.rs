use std::collections::BTreeSet;

use proptest::prelude::*;
use topocode::graph_core::{
    check_colored_homomorphism, find_colored_homomorphism, norm, vertex_coincide, vertex_split, CoincideRule,
    ColoredGraph, Graph, HomMode, VertexSplitPlan,
};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let edges = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
            Graph::new(n, edges).unwrap()
        })
    })
}

fn colored(max_n: usize, colors: i64) -> impl Strategy<Value = ColoredGraph> {
    graph(max_n).prop_flat_map(move |g| {
        (prop::collection::vec(0..colors, g.n()), prop::collection::vec(0..colors, g.q()))
            .prop_map(move |(vc, ec)| ColoredGraph::new(g.clone(), vc, Some(ec)).unwrap())
    })
}

fn mode() -> impl Strategy<Value = HomMode> {
    prop_oneof![Just(HomMode::V), Just(HomMode::E), Just(HomMode::VE)]
}

proptest! {
    #[test]
    fn split_preserves_edge_count(g in graph(7), pick in any::<usize>(), blocks in 2usize..=4, assign in prop::collection::vec(any::<usize>(), 7)) {
        let adj = g.adjacency();
        let candidates: Vec<usize> = (0..g.n()).filter(|&v| adj[v].len() >= 2).collect();
        prop_assume!(!candidates.is_empty());
        let t = candidates[pick % candidates.len()];
        let nbrs = &adj[t];
        let b = blocks.min(nbrs.len());
        let mut plan = VertexSplitPlan { target: t, blocks: vec![Vec::new(); b] };
        for (i, &v) in nbrs.iter().enumerate() {
            let slot = if i < b { i } else { assign[i] % b };
            plan.blocks[slot].push(v);
        }
        let s = vertex_split(&g, &plan).unwrap();
        prop_assert_eq!(s.q(), g.q());
        prop_assert_eq!(s.n(), g.n() + b - 1);
        prop_assert!(s.degrees().iter().sum::<usize>() == 2 * g.q());
    }

    #[test]
    fn coincide_adds_edges_or_fails(parts in prop::collection::vec(colored(4, 4), 1..4)) {
        let mut seen = BTreeSet::new();
        let mut bad = false;
        for p in &parts {
            for &(u, v) in p.graph.edges() {
                let (a, b) = (p.vcolors[u], p.vcolors[v]);
                bad |= a == b || !seen.insert(if a < b { (a, b) } else { (b, a) });
            }
        }
        match vertex_coincide(&parts, &CoincideRule::ByColor) {
            Ok(m) => {
                prop_assert!(!bad);
                prop_assert_eq!(m.graph.q(), parts.iter().map(|p| p.graph.q()).sum::<usize>());
                let colors: BTreeSet<i64> = parts.iter().flat_map(|p| p.vcolors.iter().copied()).collect();
                prop_assert_eq!(m.graph.n(), colors.len());
                prop_assert!(m.graph.edges().iter().all(|&e| norm(e).0 != norm(e).1));
            }
            Err(_) => prop_assert!(bad),
        }
    }

    #[test]
    fn homomorphism_search_agrees_with_check(h in colored(4, 3), g in colored(4, 3), mode in mode()) {
        match find_colored_homomorphism(&h, &g, mode).unwrap() {
            Some(map) => prop_assert!(check_colored_homomorphism(&h, &g, &map, mode).unwrap().ok),
            None => {
                let (hn, gn) = (h.graph.n(), g.graph.n());
                for code in 0..gn.pow(hn as u32) {
                    let map: Vec<usize> = (0..hn).map(|i| code / gn.pow(i as u32) % gn).collect();
                    prop_assert!(!check_colored_homomorphism(&h, &g, &map, mode).unwrap().ok, "missed {:?}", map);
                }
            }
        }
    }
}
