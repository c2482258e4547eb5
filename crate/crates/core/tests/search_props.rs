use modres::subgraph::{count_good, count_good_by_size, exact_f, local_search_f, verify_result, LocalSearchParams};
use modres::{is_good, sample_gnp, Graph, ModParams, VertexSet};
use proptest::prelude::*;

/// Re-enumerates every subset in plain binary order, recomputing degrees.
fn naive_counts(g: &Graph, mp: ModParams) -> Vec<u64> {
    let n = g.n();
    let mut counts = vec![0u64; n + 1];
    for mask in 1u64..(1u64 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let ok = verts.iter().all(|&v| {
            let d = verts.iter().filter(|&&u| g.has_edge(u, v)).count() as u32;
            d % mp.q() == mp.r()
        });
        if ok {
            counts[verts.len()] += 1;
        }
    }
    counts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gray_walk_matches_plain_enumeration(n in 1usize..=12, seed in any::<u64>(), q in 2u32..=4, r in 0u32..4) {
        let mp = ModParams::new(r % q, q).unwrap();
        let g = sample_gnp(n, seed);
        let naive = naive_counts(&g, mp);
        prop_assert_eq!(count_good_by_size(&g, mp).unwrap(), naive.clone());
        let best = naive.iter().rposition(|&c| c > 0).unwrap_or(0);
        let res = exact_f(&g, mp).unwrap();
        prop_assert_eq!(res.best_size, best);
        prop_assert_eq!(res.witness.is_some(), best > 0);
        prop_assert!(verify_result(&g, &res, mp).unwrap());
        for (k, &c) in naive.iter().enumerate().skip(1) {
            prop_assert_eq!(count_good(&g, k, mp).unwrap(), c);
        }
    }

    #[test]
    fn local_search_witness_is_good(n in 5usize..=40, seed in any::<u64>(), q in 2u32..=4) {
        let mp = ModParams::new(0, q).unwrap();
        let g = sample_gnp(n, seed);
        let params = LocalSearchParams { max_steps: 2000, restarts: 2, seed, ..Default::default() };
        let res = local_search_f(&g, mp, n / 2, &params).unwrap();
        if let Some(w) = &res.witness {
            prop_assert_eq!(w.len(), res.best_size);
            prop_assert!(is_good(&g, w, mp).unwrap());
        }
        prop_assert!(!res.exact);
    }
}

#[test]
fn witness_is_lex_least_among_maxima() {
    let mp = ModParams::new(1, 2).unwrap();
    for seed in 0..20 {
        let g = sample_gnp(10, seed);
        let res = exact_f(&g, mp).unwrap();
        let Some(w) = res.witness else { continue };
        let w = w.as_mask().unwrap();
        // Lex-least: among maximum good sets, the one whose lowest differing
        // vertex is in it. Reversed bits make that a plain integer maximum.
        let best = (1u64..1 << 10)
            .filter(|m| m.count_ones() as usize == res.best_size)
            .filter(|&m| is_good(&g, &VertexSet::from_mask(m), mp).unwrap())
            .max_by_key(|m| m.reverse_bits())
            .unwrap();
        assert_eq!(w, best, "seed {seed}");
    }
}

#[test]
fn even_modulus_odd_total_has_no_sets() {
    for n in 1..=12usize {
        for seed in 0..4u64 {
            let g = sample_gnp(n, seed * 1000 + n as u64);
            for q in [2u32, 4] {
                let by_size = count_good_by_size(&g, ModParams::new(1, q).unwrap()).unwrap();
                for k in (1..=n).step_by(2) {
                    assert_eq!(by_size[k], 0, "n={n} q={q} k={k}");
                }
                if q == 4 {
                    let by3 = count_good_by_size(&g, ModParams::new(3, 4).unwrap()).unwrap();
                    for k in (1..=n).step_by(2) {
                        assert_eq!(by3[k], 0);
                    }
                }
            }
        }
    }
}

#[test]
fn empty_graph_counts_are_binomials() {
    let g = Graph::empty(9);
    let by_size = count_good_by_size(&g, ModParams::new(0, 3).unwrap()).unwrap();
    let mut c = 1u64;
    for (k, &got) in by_size.iter().enumerate().skip(1) {
        c = c * (10 - k as u64) / k as u64;
        assert_eq!(got, c);
    }
}
