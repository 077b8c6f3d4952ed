//! Randomized invariants over small structures.

use proptest::prelude::*;

use perclab_core::domination::{
    dominates_exact, min_increasing_gap, min_increasing_gap_bruteforce, Mass, SiteLaw,
};
use perclab_core::graph::{clusters, parse_edge_list, write_edge_list, FiniteGraph, Mode, OpenSet, VertexId};
use num::{BigInt, Zero};

fn arb_graph(max_n: usize) -> impl Strategy<Value = FiniteGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let all_pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
            .collect();
        let m = all_pairs.len();
        (Just(n), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(n, mask)| {
            let edges: Vec<(u32, u32)> = all_pairs
                .iter()
                .zip(&mask)
                .filter(|(_, keep)| **keep)
                .map(|(e, _)| *e)
                .collect();
            let vertices = (0..n as i64).map(|i| VertexId::new(vec![i])).collect();
            FiniteGraph::from_edges(vertices, &edges, Some(0))
        })
    })
}

fn arb_law(graph: FiniteGraph) -> impl Strategy<Value = SiteLaw> {
    let size = 1usize << graph.len();
    proptest::collection::vec(0u32..100, size).prop_filter_map("needs positive mass", move |w| {
        let total: u64 = w.iter().map(|&x| x as u64).sum();
        if total == 0 {
            return None;
        }
        let mass: Vec<Mass> = w
            .iter()
            .map(|&x| Mass::new(BigInt::from(x), BigInt::from(total)))
            .collect();
        SiteLaw::from_masses(graph.clone(), mass).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trips(g in arb_graph(7)) {
        let text = write_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        prop_assert_eq!(back.vertices(), g.vertices());
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.root(), g.root());
    }

    #[test]
    fn site_clusters_partition_the_open_set(
        g in arb_graph(7),
        mask in proptest::collection::vec(any::<bool>(), 7),
    ) {
        let open: Vec<bool> = (0..g.len()).map(|i| mask[i]).collect();
        let cl = clusters(&g, &OpenSet::Vertices(open.clone()), Mode::Site);
        // disjoint and exactly covering the open set
        let mut seen = vec![false; g.len()];
        for comp in &cl.components {
            for &v in comp {
                prop_assert!(open[v as usize]);
                prop_assert!(!seen[v as usize]);
                seen[v as usize] = true;
            }
            // each member of a multi-vertex component touches the component
            if comp.len() > 1 {
                for &v in comp {
                    let touches = comp
                        .iter()
                        .any(|&w| w != v && g.neighbors(v).contains(&w));
                    prop_assert!(touches);
                }
            }
        }
        for v in 0..g.len() {
            prop_assert_eq!(seen[v], open[v]);
        }
    }

    #[test]
    fn every_law_dominates_itself(g in arb_graph(4)) {
        let runner = arb_law(g);
        // sample one law from the nested strategy
        proptest!(|(law in runner)| {
            prop_assert!(dominates_exact(&law, &law).unwrap());
        });
    }

    #[test]
    fn domination_routes_agree_on_random_laws(g in arb_graph(4)) {
        let g2 = g.clone();
        proptest!(|(a in arb_law(g.clone()), b in arb_law(g2.clone()))| {
            let dom = dominates_exact(&a, &b).unwrap();
            let (gap, upset) = min_increasing_gap(&a, &b).unwrap();
            prop_assert_eq!(dom, gap >= Mass::zero());
            let brute = min_increasing_gap_bruteforce(&a, &b).unwrap();
            prop_assert_eq!(gap.clone(), brute);
            // the reported witness event attains the reported gap
            let direct = a.event_mass(&upset) - b.event_mass(&upset);
            prop_assert_eq!(direct, gap);
        });
    }
}
