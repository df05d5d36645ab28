//! Randomized invariants, kept at a small case count: the deterministic
//! suites carry the real load.

use proptest::prelude::*;

use hopfgraph::series::Series;
use hopfgraph::weight::rat;
use hopfgraph::{Edge, Graph, Label, Leg, Species};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1u8..=4, proptest::collection::vec((0u8..4, 0u8..4), 0..5), 0u8..3).prop_map(
        |(v, raw_edges, n)| {
            let edges = raw_edges
                .into_iter()
                .map(|(a, b)| Edge::new(a % v + 1, b % v + 1, Species(1)))
                .collect();
            let legs = (1..=n)
                .map(|k| Leg::new(k % v + 1, Label(k), Species(1)))
                .collect();
            Graph::new(v as u32, legs, edges).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent(g in arb_graph()) {
        let c = g.canonical_unordered();
        prop_assert_eq!(c.canonical_unordered(), c);
    }

    #[test]
    fn canonical_form_ignores_vertex_order(g in arb_graph(), seed in 0u64..1000) {
        // apply a permutation drawn from the seed
        let v = g.vertex_count() as u8;
        let mut perm: Vec<u8> = (1..=v).collect();
        let mut state = seed;
        for i in (1..v as usize).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let h = g.relabel_vertices(&perm);
        prop_assert_eq!(g.canonical_unordered(), h.canonical_unordered());
    }

    #[test]
    fn series_exp_log_round_trip(
        c1 in -6i64..=6, c2 in -6i64..=6, d in 1i64..=4,
    ) {
        // s has zero constant term, so exp is defined and log inverts it
        let g = Series::var(&["g"], &[5], 0);
        let s = g.scale(&rat(c1, d)).add(&g.pow(2).unwrap().scale(&rat(c2, d))).unwrap();
        prop_assert_eq!(s.exp().unwrap().log().unwrap(), s);
    }
}
