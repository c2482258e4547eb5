use modres::partition::{
    balanced_count, balanced_sizes, count_balanced_good, exact_min_parts, overlap_typicality, search_partition,
    Partition, PartitionSearchParams,
};
use modres::{is_good, sample_gnp, Graph, ModParams};
use num_bigint::BigUint;
use proptest::prelude::*;

fn factorial(t: usize) -> u64 {
    (1..=t as u64).product()
}

/// Naive re-check of a search result.
fn independently_valid(g: &Graph, p: &Partition, mp: ModParams, t: usize) -> bool {
    let n = g.n();
    let mut seen = vec![0u32; n];
    for part in p.parts() {
        for v in part.iter() {
            seen[v] += 1;
        }
    }
    let mut sizes = p.sizes();
    sizes.sort_unstable();
    let mut want = balanced_sizes(n, t);
    want.sort_unstable();
    p.t() == t
        && sizes == want
        && seen.iter().all(|&c| c == 1)
        && p.parts().iter().all(|s| is_good(g, s, mp).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn good_count_bounded_by_all_count(n in 1usize..=10, t in 1usize..=4, seed in any::<u64>(), q in 2u32..=3) {
        let g = sample_gnp(n, seed);
        let mp = ModParams::new(0, q).unwrap();
        let good = count_balanced_good(&g, mp, t).unwrap();
        prop_assert!(BigUint::from(good) <= balanced_count(n, t).unwrap());
        if n % t == 0 {
            prop_assert_eq!(good % factorial(t), 0);
        }
    }

    #[test]
    fn search_results_recheck(n in 4usize..=30, seed in any::<u64>(), t in 2usize..=4) {
        let g = sample_gnp(n, seed);
        let mp = ModParams::new(0, 2).unwrap();
        let params = PartitionSearchParams { max_steps: 3000, restarts: 2, seed, ..Default::default() };
        let out = search_partition(&g, mp, t, &params).unwrap();
        if let Some(p) = &out.partition {
            prop_assert!(independently_valid(&g, p, mp, t));
            prop_assert_eq!(out.best_objective, 0);
        }
    }

    #[test]
    fn overlap_sums_match_part_sizes(n in 2usize..=40, t in 1usize..=5, a in any::<u64>(), b in any::<u64>()) {
        let label = |seed: u64| -> Vec<usize> {
            let mut labels: Vec<usize> = (0..n).map(|i| i % t).collect();
            // Simple seeded shuffle keeps both partitions balanced.
            let mut s = seed;
            for i in (1..n).rev() {
                s = modres::rng::mix64(s.wrapping_add(i as u64));
                labels.swap(i, (s % (i as u64 + 1)) as usize);
            }
            labels
        };
        let u = Partition::from_labels(&label(a), t).unwrap();
        let v = Partition::from_labels(&label(b), t).unwrap();
        let rep = overlap_typicality(&u, &v).unwrap();
        for i in 0..t {
            prop_assert_eq!(rep.matrix[i].iter().sum::<usize>(), u.parts()[i].len());
            let col: usize = (0..t).map(|r| rep.matrix[r][i]).sum();
            prop_assert_eq!(col, v.parts()[i].len());
        }
    }
}

#[test]
fn empty_graph_counts_every_partition() {
    let mp = ModParams::new(0, 3).unwrap();
    for n in 1..=12 {
        for t in 1..=4 {
            let g = Graph::empty(n);
            assert_eq!(BigUint::from(count_balanced_good(&g, mp, t).unwrap()), balanced_count(n, t).unwrap());
        }
    }
}

#[test]
fn balanced_count_oracle() {
    // 10! / (4! 3! 3!)
    assert_eq!(balanced_count(10, 3).unwrap(), BigUint::from(4200u32));
    assert_eq!(balanced_sizes(10, 3), vec![4, 3, 3]);
}

#[test]
fn two_parts_always_suffice_for_even_degrees() {
    let mp = ModParams::new(0, 2).unwrap();
    for seed in 0..200 {
        let g = sample_gnp(12, seed);
        let parts = exact_min_parts(&g, mp, 2).unwrap();
        assert!(matches!(parts, Some(1) | Some(2)), "seed {seed}");
    }
}

#[test]
fn capacity_limits_are_errors() {
    let mp = ModParams::new(0, 2).unwrap();
    assert!(matches!(count_balanced_good(&Graph::empty(17), mp, 2), Err(modres::Error::Capacity(_))));
    assert!(matches!(exact_min_parts(&Graph::empty(13), mp, 2), Err(modres::Error::Capacity(_))));
}
