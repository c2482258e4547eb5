//! Threshold sizes `k(n,q)` and `k(n,q,α)` and the entropy function `h(x)`
//! whose largest root `x₀` is the limit of `k(n,q,α)/n`.
//!
//! `g(k) = C(n,k)·q^{-k}` (times the multinomial for a residue distribution)
//! is the leading term of the expected number of good `k`-subsets of
//! G(n, 1/2). Everything here works with `log₂ g`.

use num_bigint::BigUint;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial, ln_binomial, ln_multinomial, multinomial};
use crate::error::{domain, Error, Result};

const SUM_TOL: f64 = 1e-12;
/// `|log₂ g| below this` is re-decided with exact integers.
const TIE_TOL: f64 = 1e-9;

/// Residue-class frequencies `α = (α₀, …, α_{q−1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistributionSpec {
    alpha: Vec<f64>,
}

impl DistributionSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return domain(format!("distribution needs q >= 2 classes, got {}", alpha.len()));
        }
        if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return domain(format!("frequency {a} outside [0,1]"));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return domain(format!("frequencies sum to {sum}, not 1"));
        }
        Ok(Self { alpha })
    }

    /// All mass on residue `r`.
    pub fn indicator(q: u32, r: u32) -> Result<Self> {
        if r >= q {
            return domain(format!("residue r={r} must be below q={q}"));
        }
        let mut alpha = vec![0.0; q as usize];
        alpha[r as usize] = 1.0;
        Self::new(alpha)
    }

    pub fn uniform(q: u32) -> Result<Self> {
        if q < 2 {
            return domain(format!("modulus q={q} must be at least 2"));
        }
        Ok(Self {
            alpha: vec![1.0 / q as f64; q as usize],
        })
    }

    /// Parses `a0,a1,…`; entries may be decimals or fractions such as `1/3`.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_one = |s: &str| -> Result<f64> {
            let s = s.trim();
            let v = match s.split_once('/') {
                Some((a, b)) => {
                    let a: f64 = a.trim().parse().map_err(|_| Error::InputDomain(format!("bad frequency {s:?}")))?;
                    let b: f64 = b.trim().parse().map_err(|_| Error::InputDomain(format!("bad frequency {s:?}")))?;
                    a / b
                }
                None => s.parse().map_err(|_| Error::InputDomain(format!("bad frequency {s:?}")))?,
            };
            Ok(v)
        };
        Self::new(text.split(',').map(parse_one).collect::<Result<_>>()?)
    }

    pub fn q(&self) -> u32 {
        self.alpha.len() as u32
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.alpha.len() as f64;
        self.alpha.iter().all(|a| (a - u).abs() <= SUM_TOL)
    }

    /// `(⌊α_i k⌋, ⌈α_i k⌉)` per class. Products within `1e-9` of an integer
    /// are treated as that integer so that e.g. `(1/3)·3` has one rounding.
    pub fn rounding_bounds(&self, k: u64) -> Vec<(u64, u64)> {
        self.alpha
            .iter()
            .map(|&a| {
                let x = a * k as f64;
                let nearest = x.round();
                if (x - nearest).abs() <= 1e-9 * (k as f64).max(1.0) {
                    (nearest as u64, nearest as u64)
                } else {
                    (x.floor() as u64, x.ceil() as u64)
                }
            })
            .collect()
    }

    /// Every distinct `(k_0, …, k_{q−1})` with `k_i ∈ {⌊α_i k⌋, ⌈α_i k⌉}` and
    /// `Σ k_i = k`.
    pub fn rounding_patterns(&self, k: u64) -> Vec<Vec<u64>> {
        let bounds = self.rounding_bounds(k);
        let free: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].0 != bounds[i].1).collect();
        let base: u64 = bounds.iter().map(|b| b.0).sum();
        // Each free class adds 0 or 1 to the floor total; exactly k - base must add 1.
        let Some(ups) = k.checked_sub(base) else {
            return Vec::new();
        };
        if ups as usize > free.len() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for choice in 0u64..(1u64 << free.len()) {
            if choice.count_ones() as u64 != ups {
                continue;
            }
            let mut pattern: Vec<u64> = bounds.iter().map(|b| b.0).collect();
            for (bit, &i) in free.iter().enumerate() {
                if (choice >> bit) & 1 == 1 {
                    pattern[i] += 1;
                }
            }
            out.push(pattern);
        }
        out
    }
}

/// Result of a threshold computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: u64,
    pub q: u32,
    pub alpha: Option<DistributionSpec>,
    pub k: u64,
    /// `log₂ g(k)` (worst rounding pattern when `alpha` is set).
    pub log2_g_k: f64,
    /// `log₂ g(k+1)`; absent when `k = n`.
    pub log2_g_k1: Option<f64>,
    pub x0: Option<f64>,
}

fn check_q(q: u32) -> Result<()> {
    if q < 2 {
        return domain(format!("modulus q={q} must be at least 2"));
    }
    Ok(())
}

/// `log₂(C(n,k)·q^{-k})`.
pub fn log2_g(n: u64, k: u64, q: u32) -> Result<f64> {
    check_q(q)?;
    if k > n {
        return domain(format!("k={k} exceeds n={n}"));
    }
    Ok(ln_binomial(n, k) / std::f64::consts::LN_2 - k as f64 * (q as f64).log2())
}

/// `log₂(C(n,k)·multinomial(k; pattern)·q^{-k})`.
pub fn log2_g_pattern(n: u64, q: u32, pattern: &[u64]) -> f64 {
    let k: u64 = pattern.iter().sum();
    (ln_binomial(n, k) + ln_multinomial(pattern)) / std::f64::consts::LN_2 - k as f64 * (q as f64).log2()
}

/// Whether `C(n,k)·mult ≥ q^k`, decided in exact integers.
fn exact_at_least_one(n: u64, k: u64, q: u32, pattern: Option<&[u64]>) -> bool {
    let mut lhs = binomial(n, k);
    if let Some(p) = pattern {
        lhs *= multinomial(p);
    }
    lhs >= BigUint::from(q).pow(k)
}

fn nonnegative(value: f64, exact: impl FnOnce() -> bool) -> bool {
    if value.abs() < TIE_TOL {
        exact()
    } else {
        value >= 0.0
    }
}

/// Greatest `k` with `C(n,k)·q^{-k} ≥ 1`.
pub fn threshold_k(n: u64, q: u32) -> Result<ThresholdReport> {
    check_q(q)?;
    if n == 0 {
        return domain("threshold needs n >= 1");
    }
    // log g is concave in k with g(0) = 1, so the admissible k form a prefix.
    let mut k = n;
    let mut above: Option<f64> = None;
    loop {
        let v = log2_g(n, k, q)?;
        if nonnegative(v, || exact_at_least_one(n, k, q, None)) {
            let r = ThresholdReport {
                n,
                q,
                alpha: None,
                k,
                log2_g_k: v,
                log2_g_k1: above,
                x0: Some(root_x0(&DistributionSpec::indicator(q, 0)?)),
            };
            return Ok(r);
        }
        above = Some(v);
        // k = 0 always qualifies, so this never underflows.
        k -= 1;
    }
}

/// Integer-only `k(n,q)`; the oracle for the floating path.
pub fn threshold_k_exact(n: u64, q: u32) -> Result<u64> {
    check_q(q)?;
    Ok((0..=n).rev().find(|&k| exact_at_least_one(n, k, q, None)).unwrap_or(0))
}

/// Smallest `log₂ g` over the rounding patterns at `k`, with the pattern.
fn worst_pattern(n: u64, q: u32, alpha: &DistributionSpec, k: u64) -> Result<(f64, Vec<u64>)> {
    let patterns = alpha.rounding_patterns(k);
    patterns
        .into_iter()
        .map(|p| (log2_g_pattern(n, q, &p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Internal(format!("no rounding pattern sums to k={k}")))
}

/// Greatest `k` such that every rounding pattern of `αk` summing to `k`
/// satisfies `C(n,k)·multinomial·q^{-k} ≥ 1`.
pub fn threshold_k_alpha(n: u64, alpha: &DistributionSpec) -> Result<ThresholdReport> {
    let q = alpha.q();
    if n == 0 {
        return domain("threshold needs n >= 1");
    }
    let mut above = None;
    for k in (0..=n).rev() {
        let patterns = alpha.rounding_patterns(k);
        if patterns.is_empty() {
            return Err(Error::Internal(format!("no rounding pattern sums to k={k}")));
        }
        let mut ok = true;
        for p in &patterns {
            let v = log2_g_pattern(n, q, p);
            if !nonnegative(v, || exact_at_least_one(n, k, q, Some(p))) {
                ok = false;
                break;
            }
        }
        let (worst, _) = worst_pattern(n, q, alpha, k)?;
        if ok {
            return Ok(ThresholdReport {
                n,
                q,
                alpha: Some(alpha.clone()),
                k,
                log2_g_k: worst,
                log2_g_k1: above,
                x0: Some(root_x0(alpha)),
            });
        }
        above = Some(worst);
    }
    Err(Error::Internal("k = 0 must always qualify".into()))
}

/// `H(α) = −Σ α_i log₂ α_i` with `0·log 0 = 0`.
pub fn entropy(alpha: &DistributionSpec) -> f64 {
    if alpha.is_uniform() {
        return (alpha.q() as f64).log2();
    }
    alpha.values().iter().filter(|&&a| a > 0.0).map(|&a| -a * a.log2()).sum()
}

/// `H(x) = H((x, 1−x))`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// `h(x) = H(α)x + H(x) − x·log₂q` on `[0,1]`.
pub fn h_of(x: f64, alpha: &DistributionSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("h is defined on [0,1], got x={x}"));
    }
    Ok(entropy(alpha) * x + binary_entropy(x) - x * (alpha.q() as f64).log2())
}

/// `h′(x) = H(α) + log₂((1−x)/x) − log₂q` on `(0,1)`.
pub fn h_prime(x: f64, alpha: &DistributionSpec) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("h' is defined on (0,1), got x={x}"));
    }
    Ok(entropy(alpha) + ((1.0 - x) / x).log2() - (alpha.q() as f64).log2())
}

/// Interior maximiser of `h`, where `h′` vanishes.
pub fn h_argmax(alpha: &DistributionSpec) -> f64 {
    1.0 / (1.0 + alpha.q() as f64 * (-entropy(alpha)).exp2())
}

/// Bisection for a sign change `f(lo) >= 0 > f(hi)`; returns the last `lo`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    debug_assert!(f(lo) >= 0.0 && f(hi) < 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `x₀ = max{x ∈ (0,1] : h(x) = 0}`.
pub fn root_x0(alpha: &DistributionSpec) -> f64 {
    let h = |x: f64| entropy(alpha) * x + binary_entropy(x) - x * (alpha.q() as f64).log2();
    if h(1.0).abs() <= SUM_TOL {
        return 1.0;
    }
    bisect(h, h_argmax(alpha), 1.0, 1e-13)
}

/// `|log₂ g(k)/n − h(k/n)|` for the worst rounding pattern at `k`.
pub fn appendix_gap(n: u64, k: u64, alpha: &DistributionSpec) -> Result<f64> {
    if n == 0 || k > n {
        return domain(format!("need 0 <= k <= n and n >= 1, got n={n} k={k}"));
    }
    let h = h_of(k as f64 / n as f64, alpha)?;
    let q = alpha.q();
    alpha
        .rounding_patterns(k)
        .iter()
        .map(|p| (log2_g_pattern(n, q, p) / n as f64 - h).abs())
        .max_by(f64::total_cmp)
        .ok_or_else(|| Error::Internal(format!("no rounding pattern sums to k={k}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(q: u32) -> DistributionSpec {
        DistributionSpec::indicator(q, 0).unwrap()
    }

    #[test]
    fn log2_g_examples() {
        assert_eq!(log2_g(17, 0, 3).unwrap(), 0.0);
        assert!((log2_g(10, 6, 2).unwrap() - (210.0f64 / 64.0).log2()).abs() < 1e-12);
        assert!((log2_g(10, 7, 2).unwrap() - (120.0f64 / 128.0).log2()).abs() < 1e-12);
        assert!(log2_g(10, 11, 2).is_err());
    }

    #[test]
    fn threshold_examples() {
        let r = threshold_k(10, 2).unwrap();
        assert_eq!(r.k, 6);
        assert!(r.log2_g_k >= 0.0 && r.log2_g_k1.unwrap() < 0.0);
        assert_eq!(threshold_k(10, 3).unwrap().k, 5);
        let big = threshold_k(1_000_000, 2).unwrap();
        assert!((big.k as f64 / 1e6 - 0.7729).abs() <= 5e-4, "{}", big.k);
    }

    #[test]
    fn ties_count_as_admissible() {
        // C(4,2) = 6 and C(4,1) = 4 = 4^1: g(1) = 1 exactly for q = 4, n = 4.
        assert_eq!(threshold_k_exact(4, 4).unwrap(), 1);
        assert_eq!(threshold_k(4, 4).unwrap().k, 1);
    }

    #[test]
    fn exact_and_float_paths_agree() {
        for n in 1..=60 {
            for q in 2..=10 {
                assert_eq!(threshold_k(n, q).unwrap().k, threshold_k_exact(n, q).unwrap(), "n={n} q={q}");
            }
        }
    }

    #[test]
    fn threshold_is_at_least_n_over_q() {
        for n in 1..=1000u64 {
            for q in 2..=10u32 {
                assert!(threshold_k(n, q).unwrap().k >= n / q as u64);
            }
        }
    }

    #[test]
    fn monotone_ratio_identity() {
        for &(n, q) in &[(50u64, 3u32), (1000, 2), (12345, 7)] {
            for k in (0..n).step_by((n as usize / 25).max(1)) {
                let lhs = log2_g(n, k, q).unwrap() - log2_g(n, k + 1, q).unwrap();
                let rhs = (q as f64 * (k + 1) as f64 / (n - k) as f64).log2();
                assert!((lhs - rhs).abs() < 1e-9, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn alpha_threshold_examples() {
        for q in 2..=6 {
            for n in [1, 7, 60, 500] {
                let a = DistributionSpec::indicator(q, q - 1).unwrap();
                assert_eq!(threshold_k_alpha(n, &a).unwrap().k, threshold_k(n, q).unwrap().k);
            }
        }
        // Brute force over k and both roundings of k/2.
        let half = DistributionSpec::new(vec![0.5, 0.5]).unwrap();
        let brute = (0..=10u64)
            .filter(|&k| {
                [k / 2, k.div_ceil(2)]
                    .iter()
                    .all(|&k0| binomial(10, k) * binomial(k, k0) >= BigUint::from(2u32).pow(k))
            })
            .max()
            .unwrap();
        assert_eq!(brute, 9);
        assert_eq!(threshold_k_alpha(10, &half).unwrap().k, brute);
    }

    #[test]
    fn uniform_alpha_threshold_approaches_n() {
        let u = DistributionSpec::uniform(3).unwrap();
        let r = threshold_k_alpha(3000, &u).unwrap();
        assert!(r.k as f64 / 3000.0 > 0.97, "{}", r.k);
    }

    #[test]
    fn rounding_patterns_cover_k() {
        let a = DistributionSpec::new(vec![0.2, 0.3, 0.5]).unwrap();
        for k in 0..50 {
            let pats = a.rounding_patterns(k);
            assert!(!pats.is_empty());
            for p in pats {
                assert_eq!(p.iter().sum::<u64>(), k);
            }
        }
        let third = DistributionSpec::parse("1/3, 1/3, 1/3").unwrap();
        assert_eq!(third.rounding_patterns(3), vec![vec![1, 1, 1]]);
        assert_eq!(third.rounding_patterns(4).len(), 3);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        let u3 = DistributionSpec::uniform(3).unwrap();
        assert_eq!(entropy(&u3), 3f64.log2());
        assert!((entropy(&u3) - 1.58496).abs() < 1e-5);
        assert_eq!(entropy(&ind(4)), 0.0);
    }

    #[test]
    fn h_boundary_values() {
        for q in 2..=6 {
            assert_eq!(h_of(0.0, &ind(q)).unwrap(), 0.0);
            assert_eq!(h_of(1.0, &DistributionSpec::uniform(q).unwrap()).unwrap(), 0.0);
            assert!(h_of(1.0, &ind(q)).unwrap() < 0.0);
            assert!(h_prime(0.0, &ind(q)).is_err());
            assert!(h_prime(1.0, &ind(q)).is_err());
        }
    }

    #[test]
    fn h_prime_is_the_derivative() {
        let a = DistributionSpec::new(vec![0.1, 0.2, 0.7]).unwrap();
        let step = 1e-5;
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let fd = (h_of(x + step, &a).unwrap() - h_of(x - step, &a).unwrap()) / (2.0 * step);
            assert!((fd - h_prime(x, &a).unwrap()).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn h_prime_strictly_decreasing() {
        let a = DistributionSpec::new(vec![0.25, 0.75]).unwrap();
        let grid: Vec<f64> = (1..1000).map(|i| h_prime(i as f64 / 1000.0, &a).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
        let xs = h_argmax(&a);
        assert!(h_prime(xs - 1e-6, &a).unwrap() > 0.0 && h_prime(xs + 1e-6, &a).unwrap() < 0.0);
    }

    #[test]
    fn root_examples() {
        for q in 2..=6 {
            assert_eq!(root_x0(&DistributionSpec::uniform(q).unwrap()), 1.0);
        }
        let x = root_x0(&DistributionSpec::new(vec![1.0, 0.0]).unwrap());
        assert!((x - 0.7729).abs() <= 5e-4);
        // Independent oracle value of H(x) = x to 12 digits.
        assert!((x - 0.772_907_804_780_652).abs() < 1e-10);

        // Dense sign scan for H(x) = x·log₂3.
        let a3 = ind(3);
        let x3 = root_x0(&a3);
        let scan = (1..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .filter(|&x| binary_entropy(x) - x * 3f64.log2() >= 0.0)
            .fold(0.0, f64::max);
        assert!(x3 > 0.25 && x3 < 1.0);
        assert!((x3 - scan).abs() <= 1e-5, "{x3} vs {scan}");
        assert!(h_of(x3, &a3).unwrap().abs() <= 1e-9);
        assert!((1..100).all(|i| h_of(x3 + (1.0 - x3) * i as f64 / 100.0, &a3).unwrap() < 0.0));
    }

    #[test]
    fn appendix_gap_examples() {
        let u = DistributionSpec::uniform(3).unwrap();
        assert_eq!(appendix_gap(500, 0, &u).unwrap(), 0.0);
        let g3 = appendix_gap(1_000, 300, &u).unwrap();
        let g4 = appendix_gap(10_000, 3_000, &u).unwrap();
        assert!(g4 < g3 && g4 <= 0.05, "{g3} {g4}");
        // Python/mpmath oracle values.
        assert!((g3 - 0.013_689_400_142_850_6).abs() < 1e-9);
        assert!((g4 - 0.001_866_899_986_100_46).abs() < 1e-9);
    }

    #[test]
    fn distribution_validation() {
        assert!(DistributionSpec::new(vec![1.0]).is_err());
        assert!(DistributionSpec::new(vec![-0.5, 1.5]).is_err());
        assert!(DistributionSpec::parse("0.5,x").is_err());
        assert_eq!(DistributionSpec::parse("1/4,3/4").unwrap().values(), &[0.25, 0.75]);
    }

    #[test]
    fn report_json_keys() {
        let v: serde_json::Value = serde_json::to_value(threshold_k(10, 3).unwrap()).unwrap();
        for key in ["n", "q", "alpha", "k", "log2_g_k", "log2_g_k1", "x0"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
