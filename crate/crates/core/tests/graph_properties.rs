mod common;

use std::collections::BTreeSet;

use common::*;
use mobility_loci::graph::{degree_features, strong_components, MobilityGraph, ZoneId};
use proptest::prelude::*;

fn unit(n: usize, edges: &[(usize, usize)]) -> MobilityGraph {
    graph(n, &edges.iter().map(|&(a, b)| (a, b, 1.0)).collect::<Vec<_>>())
}

fn index_sets(g: &MobilityGraph, parts: &[Vec<ZoneId>]) -> BTreeSet<BTreeSet<usize>> {
    parts
        .iter()
        .map(|c| c.iter().map(|z| g.index_of_zone(z).unwrap()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn components_match_transitive_closure((n, edges) in arb_digraph(8)) {
        let g = unit(n, &edges);
        let partition = strong_components(&g);
        prop_assert_eq!(index_sets(&g, partition.components()), closure_components(n, &edges));
    }

    #[test]
    fn components_follow_relabeling(
        (n, edges, perm) in arb_digraph(8).prop_flat_map(|(n, e)| {
            (Just(n), Just(e), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
    ) {
        let g = unit(n, &edges);
        let relabeled: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let h = unit(n, &relabeled);
        let mapped: BTreeSet<BTreeSet<usize>> = index_sets(&g, strong_components(&g).components())
            .into_iter()
            .map(|c| c.into_iter().map(|v| perm[v]).collect())
            .collect();
        prop_assert_eq!(mapped, index_sets(&h, strong_components(&h).components()));
    }

    #[test]
    fn ordering_is_by_size_then_smallest_zone((n, edges) in arb_digraph(8)) {
        let partition = strong_components(&unit(n, &edges));
        let keys: Vec<(std::cmp::Reverse<usize>, ZoneId)> = partition
            .components()
            .iter()
            .map(|c| (std::cmp::Reverse(c.len()), c.iter().min().unwrap().clone()))
            .collect();
        prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(partition.components().iter().map(Vec::len).sum::<usize>(), n);
    }

    #[test]
    fn component_vertices_have_in_and_out_edges((n, edges) in arb_digraph(8)) {
        let g = unit(n, &edges);
        for part in strong_components(&g).components().iter().filter(|c| c.len() >= 2) {
            let sub = g.induced_subgraph(part.iter()).unwrap();
            for row in degree_features(&sub).rows {
                prop_assert!(row.in_degree >= 1 && row.out_degree >= 1, "{} in {:?}", row.zone, part);
            }
        }
    }

    #[test]
    fn degrees_count_incident_edges((n, edges) in arb_strong_digraph(8)) {
        let g = int_graph(n, &edges);
        let table = degree_features(&g);
        for (v, row) in table.rows.iter().enumerate() {
            let v = g.index_of_zone(&row.zone).unwrap_or(v);
            let incoming: Vec<i64> = edges.iter().filter(|e| e.1 == v).map(|e| e.2).collect();
            let outgoing: Vec<i64> = edges.iter().filter(|e| e.0 == v).map(|e| e.2).collect();
            prop_assert_eq!(row.in_degree, incoming.len());
            prop_assert_eq!(row.out_degree, outgoing.len());
            prop_assert_eq!(row.weighted_in, incoming.iter().sum::<i64>() as f64);
            prop_assert_eq!(row.weighted_out, outgoing.iter().sum::<i64>() as f64);
            prop_assert!(row.in_degree < n);
        }
    }
}
