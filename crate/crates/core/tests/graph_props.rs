use modres::{degrees_mod, is_good, sample_gnp, Graph, ModParams, VertexSet};
use proptest::prelude::*;

fn naive_degrees(g: &Graph, set: &[usize], q: u32) -> Vec<u32> {
    set.iter()
        .map(|&v| (set.iter().filter(|&&u| u != v && g.has_edge(u, v)).count() as u32) % q)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sampled_graphs_are_simple(n in 0usize..150, seed in any::<u64>()) {
        let g = sample_gnp(n, seed);
        prop_assert!(g.check_invariants().is_ok());
        for i in 0..n {
            prop_assert!(!g.has_edge(i, i));
            for j in 0..n {
                prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
            }
        }
    }

    #[test]
    fn text_codec_round_trips(n in 0usize..90, seed in any::<u64>()) {
        let g = sample_gnp(n, seed);
        let back = Graph::decode(&g.encode()).unwrap();
        prop_assert!(back == g);
    }

    #[test]
    fn degrees_match_double_loop(n in 1usize..=16, seed in any::<u64>(), mask in any::<u64>(), q in 2u32..7) {
        let g = sample_gnp(n, seed);
        let set = VertexSet::from_mask(mask & ((1u64 << n) - 1));
        let fast = degrees_mod(&g, &set, q).unwrap();
        prop_assert_eq!(fast.entries(), &naive_degrees(&g, &set.to_vec(), q)[..]);
    }

    #[test]
    fn mod_two_degrees_sum_to_even(n in 1usize..=40, seed in any::<u64>(), mask in any::<u64>()) {
        let g = sample_gnp(n, seed);
        let keep = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        let set = VertexSet::from_mask(keep);
        let d = degrees_mod(&g, &set, 2).unwrap();
        prop_assert_eq!(d.entries().iter().sum::<u32>() % 2, 0);
    }
}

#[test]
fn sampling_ignores_thread_count() {
    let serial: Vec<Graph> = (0..16).map(|s| sample_gnp(70, s)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel: Vec<Graph> = pool.install(|| {
        use rayon::prelude::*;
        (0..16u64).into_par_iter().map(|s| sample_gnp(70, s)).collect()
    });
    assert!(serial == parallel);
}

#[test]
fn k3_text_form() {
    let g = Graph::complete(3);
    assert_eq!(g.encode(), "3\n011\n101\n110\n");
    let mp = ModParams::new(0, 2).unwrap();
    assert!(is_good(&g, &VertexSet::from_vertices([0, 1, 2]), mp).unwrap());
    assert!(!is_good(&g, &VertexSet::from_vertices([0, 1]), mp).unwrap());
    assert!(matches!(is_good(&g, &VertexSet::new(), mp), Err(modres::Error::InputDomain(_))));
}

#[test]
fn decode_rejects_bad_input() {
    assert!(Graph::decode("2\n01\n00\n").unwrap_err().to_string().contains("asymmetric at (1,0)"));
    assert!(Graph::decode("2\n11\n10\n").is_err());
    assert!(Graph::decode("2\n01\n10").is_err());
    assert!(Graph::decode("3\n011\n101\n").is_err());
}
