use modres::char_sums::{
    cosine_gap, prob_asym_rowsums, prob_joint, prob_sum_mod, prob_symmetric, vector_from_index, ExactProb, Method,
};
use modres::ResidueVector;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn exact(p: &ExactProb) -> BigRational {
    p.exact.clone().expect("exact value")
}

#[test]
fn symmetric_methods_agree_and_normalize() {
    for q in [2u32, 3, 4, 5] {
        for m in 1..=5usize {
            let total = (q as usize).pow(m as u32);
            let mut mass = BigRational::zero();
            let mut fmass = 0.0;
            for idx in 0..total {
                let v = ResidueVector::new(q, vector_from_index(idx, m, q)).unwrap();
                let e = prob_symmetric(&v, Method::Enumeration).unwrap();
                let f = prob_symmetric(&v, Method::Fourier).unwrap();
                assert!((e.value() - f.value()).abs() < 1e-9, "q={q} v={:?}", v.entries());
                mass += exact(&e);
                fmass += f.value();
            }
            assert!(mass.is_one());
            assert!((fmass - 1.0).abs() < 1e-9);
        }
    }
}

fn support_size(m: usize, q: u32) -> usize {
    (0..(q as usize).pow(m as u32))
        .filter(|&idx| {
            let v = ResidueVector::new(q, vector_from_index(idx, m, q)).unwrap();
            !prob_symmetric(&v, Method::Enumeration).unwrap().is_exact_zero()
        })
        .count()
}

#[test]
fn odd_q_support_sizes() {
    // Reachable degree vectors, counted by brute force over all graphs.
    assert_eq!(support_size(3, 3), 8);
    assert_eq!(support_size(4, 3), 53);
    assert_eq!(support_size(5, 3), 243);
    assert_eq!(support_size(6, 3), 729);
    assert_eq!(support_size(4, 5), 54);
    assert_eq!(support_size(5, 5), 533);
}

#[test]
fn joint_mass_sums_to_one() {
    for q in [2u32, 3] {
        for s in 1..=2usize {
            for t in 1..=3usize {
                let mut mass = BigRational::zero();
                for i in 0..(q as usize).pow(s as u32) {
                    let u = ResidueVector::new(q, vector_from_index(i, s, q)).unwrap();
                    for j in 0..(q as usize).pow(t as u32) {
                        let v = ResidueVector::new(q, vector_from_index(j, t, q)).unwrap();
                        mass += exact(&prob_joint(&u, &v, Method::Enumeration).unwrap());
                    }
                }
                assert!(mass.is_one(), "q={q} s={s} t={t}");
            }
        }
    }
}

#[test]
fn cosine_gap_never_positive() {
    for q in 2..=1000 {
        assert!(cosine_gap(q).unwrap() <= 0.0, "q={q}");
    }
}

#[test]
fn sum_mod_oracle_values() {
    // Bin(5, 1/2) hits 0 or 3: 1 + 10 of 32.
    let p = prob_sum_mod(5, 0, 3, Method::Enumeration).unwrap();
    assert_eq!(exact(&p), BigRational::new(11.into(), 32.into()));
    let f = prob_sum_mod(5, 0, 3, Method::Fourier).unwrap();
    assert!((f.value() - 11.0 / 32.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sum_mod_methods_agree(n in 0u64..=24, q in 2u32..9, a in 0u32..9) {
        let a = a % q;
        let e = prob_sum_mod(n, a, q, Method::Enumeration).unwrap();
        let f = prob_sum_mod(n, a, q, Method::Fourier).unwrap();
        let c = prob_sum_mod(n, a, q, Method::ClosedForm).unwrap();
        prop_assert!((e.value() - f.value()).abs() < 1e-9);
        prop_assert_eq!(exact(&e), exact(&c));
        let den = exact(&e).denom().clone();
        prop_assert!(den.magnitude().count_ones() == 1);
    }

    #[test]
    fn row_sums_are_row_products(t in 1u64..12, q in 2u32..6, raw in proptest::collection::vec(0u32..6, 1..4)) {
        let entries: Vec<u32> = raw.iter().map(|x| x % q).collect();
        let v = ResidueVector::new(q, entries.clone()).unwrap();
        let mut product = BigRational::one();
        for &a in &entries {
            product *= exact(&prob_sum_mod(t, a, q, Method::ClosedForm).unwrap());
        }
        prop_assert_eq!(exact(&prob_asym_rowsums(t, &v, Method::ClosedForm).unwrap()), product.clone());
        if t * entries.len() as u64 <= 24 {
            prop_assert_eq!(exact(&prob_asym_rowsums(t, &v, Method::Enumeration).unwrap()), product);
        }
    }
}
