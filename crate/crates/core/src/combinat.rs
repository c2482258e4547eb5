//! Binomial and multinomial coefficients, exact and in log space.
//!
//! The log-space routines write `ln n!` as Stirling's leading terms plus the
//! remainder `δ(n) = ln n! − (n + ½)ln n + n − ½ln 2π`. Combining the leading
//! terms of numerator and denominator before adding them up leaves only
//! nonnegative `k·ln(n/k)` contributions, so `ln C(n, k)` keeps full relative
//! precision even when `n` is in the hundreds of millions and `k` is tiny.

use num_bigint::BigUint;
use num_traits::One;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this, `δ(n)` comes from an exact-summation table.
const TABLE_LEN: usize = 32;

fn ln_factorial_table() -> &'static [f64; TABLE_LEN] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for i in 1..TABLE_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    })
}

/// Stirling remainder `δ(n)`; `δ(0)` is unused and returned as 0.
pub fn stirling_remainder(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if (n as usize) < TABLE_LEN {
        let x = n as f64;
        return ln_factorial_table()[n as usize] - (x + 0.5) * x.ln() + x - HALF_LN_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    let xx = x * x;
    (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
}

pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * x.ln() + HALF_LN_2PI + stirling_remainder(n)
}

/// `-part·ln(part/total)`, accurate for parts close to `total`.
#[inline]
fn scaled_entropy_term(part: u64, total: u64) -> f64 {
    let p = part as f64;
    let t = total as f64;
    if 2 * part > total {
        -p * (-((total - part) as f64) / t).ln_1p()
    } else {
        p * (t / p).ln()
    }
}

/// `ln(n! / Π parts_i!)`; the parts must sum to `n`. Zero parts are ignored.
pub fn ln_multinomial(parts: &[u64]) -> f64 {
    let n: u64 = parts.iter().sum();
    let nonzero = || parts.iter().copied().filter(|&p| p > 0);
    if nonzero().count() <= 1 {
        return 0.0;
    }
    let leading: f64 = nonzero().map(|p| scaled_entropy_term(p, n)).sum();
    let half_logs: f64 = 0.5 * (n as f64).ln() - nonzero().map(|p| 0.5 * (p as f64).ln()).sum::<f64>();
    let count = nonzero().count() as f64;
    let remainders = stirling_remainder(n) - nonzero().map(stirling_remainder).sum::<f64>();
    leading + half_logs - (count - 1.0) * HALF_LN_2PI + remainders
}

/// `ln C(n, k)` for `k <= n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_multinomial(&[k, n - k])
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn multinomial(parts: &[u64]) -> BigUint {
    let mut total = 0u64;
    let mut acc = BigUint::one();
    for &p in parts {
        total += p;
        acc *= binomial(total, p);
    }
    acc
}

/// Natural log of a positive big integer, to double precision.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        let f: f64 = num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY);
        return f.ln();
    }
    let shift = bits - 64;
    let top: u64 = num_traits::ToPrimitive::to_u64(&(x >> shift)).unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}
