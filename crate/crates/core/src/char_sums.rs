//! Exact residue probabilities for Bernoulli(1/2) matrices.
//!
//! Every probability has (at least) two independent routes:
//!
//! * `Enumeration` walks every 0/1 outcome and counts, giving an exact
//!   rational with a power-of-two denominator;
//! * `Fourier` expands the indicator `δ(x ≡ 0)` over the characters
//!   `e_q(x) = exp(2πix/q)` and evaluates the resulting finite sum in complex
//!   arithmetic;
//! * `ClosedForm` (row sums only) counts with binomial coefficients.
//!
//! The routes are used as mutual oracles. Fourier sums are accumulated with
//! Neumaier compensation from a precomputed table of the `q` roots of unity.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::combinat::binomial;
use crate::error::{capacity, domain, Result};
use crate::graph::ResidueVector;

/// Cap on `s·t` for matrix enumeration.
pub const MATRIX_ENUM_CAP: usize = 24;
/// Cap on `C(m,2)` for graph enumeration (m ≤ 8).
pub const GRAPH_ENUM_CAP: usize = 28;
/// Cap on the number of Fourier terms.
pub const FOURIER_TERM_CAP: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    Fourier,
    ClosedForm,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumeration" | "enum" => Ok(Method::Enumeration),
            "fourier" => Ok(Method::Fourier),
            "closed-form" | "closed" => Ok(Method::ClosedForm),
            other => domain(format!("unknown method {other:?}")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::Fourier => "fourier",
            Method::ClosedForm => "closed-form",
        })
    }
}

/// A probability together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactProb {
    /// Exact value for counting methods.
    #[serde(serialize_with = "ser_ratio")]
    pub exact: Option<BigRational>,
    /// Floating value; equals `exact` rounded when that is present.
    pub approx: f64,
    pub method: Method,
}

fn ser_ratio<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

impl ExactProb {
    fn exact(value: BigRational, method: Method) -> Self {
        Self {
            approx: ratio_to_f64(&value),
            exact: Some(value),
            method,
        }
    }

    fn counted(count: u64, log2_total: u32, method: Method) -> Self {
        Self::exact(
            BigRational::new(BigInt::from(count), BigInt::one() << log2_total),
            method,
        )
    }

    fn zero(method: Method) -> Self {
        Self::exact(BigRational::zero(), method)
    }

    fn approximate(value: f64, method: Method) -> Self {
        Self {
            exact: None,
            approx: value.clamp(0.0, 1.0),
            method,
        }
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact.as_ref().is_some_and(|r| r.is_zero())
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    let (num, den) = (r.numer(), r.denom());
    if let (Some(a), Some(b)) = (num.to_f64(), den.to_f64()) {
        if a.is_finite() && b.is_finite() {
            return a / b;
        }
    }
    // Scale both down to ~60 significant bits.
    let shift = |x: &BigInt| x.bits().saturating_sub(60);
    let (sn, sd) = (shift(num), shift(den));
    let a = (num >> sn).to_f64().unwrap_or(0.0);
    let b = (den >> sd).to_f64().unwrap_or(1.0);
    a / b * 2f64.powi(sn as i32 - sd as i32)
}

/// The `q` distinct values of `e_q(x)`.
#[derive(Debug, Clone)]
pub struct RootTable {
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(q: u32) -> Self {
        let roots = (0..q)
            .map(|x| {
                // Use exact values at the quarter turns to avoid cos(π/2) ≠ 0 drift.
                let (num, den) = (4 * x as u64, q as u64);
                if num % den == 0 {
                    match (num / den) % 4 {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * x as f64 / q as f64)
                }
            })
            .collect();
        Self { roots }
    }

    #[inline]
    pub fn e(&self, x: i64) -> Complex64 {
        self.roots[x.rem_euclid(self.roots.len() as i64) as usize]
    }

    /// `(1 + e_q(x))/2`, the expectation of `e_q(x·ξ)` for a fair bit ξ.
    #[inline]
    pub fn half_shift(&self, x: i64) -> Complex64 {
        (Complex64::new(1.0, 0.0) + self.e(x)) * 0.5
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    #[inline]
    fn add_part(acc: &mut (f64, f64), x: f64) {
        let t = acc.0 + x;
        if acc.0.abs() >= x.abs() {
            acc.1 += (acc.0 - t) + x;
        } else {
            acc.1 += (x - t) + acc.0;
        }
        acc.0 = t;
    }

    #[inline]
    fn add(&mut self, z: Complex64) {
        Self::add_part(&mut self.re, z.re);
        Self::add_part(&mut self.im, z.im);
    }

    fn total(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn check_q(q: u32) -> Result<()> {
    if q < 2 {
        return domain(format!("modulus q={q} must be at least 2"));
    }
    Ok(())
}

fn fourier_cap(q: u32, dims: usize) -> Result<()> {
    let terms = (q as f64).powi(dims as i32);
    if terms > FOURIER_TERM_CAP as f64 {
        return capacity(format!(
            "fourier sum over q^{dims} = {terms:.3e} terms exceeds the cap of {FOURIER_TERM_CAP}"
        ));
    }
    Ok(())
}

fn unsupported<T>(op: &str, method: Method) -> Result<T> {
    domain(format!("{op} has no {method} route"))
}

/// Advances a base-`q` odometer; returns false after the last vector.
#[inline]
fn next_vector(digits: &mut [u32], q: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

/// `P[ξ₁ + … + ξ_n ≡ a (mod q)]` for iid fair bits.
pub fn prob_sum_mod(n: u64, a: u32, q: u32, method: Method) -> Result<ExactProb> {
    check_q(q)?;
    if a >= q {
        return domain(format!("residue a={a} must be below q={q}"));
    }
    match method {
        Method::ClosedForm => {
            let mut count = BigUint::zero();
            let mut j = a as u64;
            while j <= n {
                count += binomial(n, j);
                j += q as u64;
            }
            Ok(ExactProb::exact(
                BigRational::new(BigInt::from(count), BigInt::one() << n),
                method,
            ))
        }
        Method::Enumeration => {
            if n > MATRIX_ENUM_CAP as u64 {
                return capacity(format!("enumerating 2^{n} bit strings exceeds 2^{MATRIX_ENUM_CAP}"));
            }
            let count = (0u64..1 << n).filter(|x| x.count_ones() % q == a).count() as u64;
            Ok(ExactProb::counted(count, n as u32, method))
        }
        Method::Fourier => {
            let roots = RootTable::new(q);
            let mut acc = CompensatedSum::default();
            for l in 0..q as i64 {
                acc.add(roots.e(-l * a as i64) * powu(roots.half_shift(l), n));
            }
            Ok(ExactProb::approximate(acc.total().re / q as f64, method))
        }
    }
}

fn powu(mut base: Complex64, mut exp: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// `P[M·1_t ≡ v]` for an `s×t` iid Bernoulli(1/2) matrix, `s = |v|`.
pub fn prob_asym_rowsums(t: u64, v: &ResidueVector, method: Method) -> Result<ExactProb> {
    let s = v.len();
    let q = v.q();
    match method {
        Method::Enumeration => {
            let cells = s as u64 * t;
            if cells > MATRIX_ENUM_CAP as u64 {
                return capacity(format!("enumerating {s}x{t} matrices exceeds s*t <= {MATRIX_ENUM_CAP}"));
            }
            let t = t as u32;
            let row_mask = if t == 0 { 0 } else { (1u64 << t) - 1 };
            let count = (0u64..1 << cells)
                .filter(|&m| {
                    v.entries()
                        .iter()
                        .enumerate()
                        .all(|(i, &vi)| ((m >> (i as u32 * t)) & row_mask).count_ones() % q == vi)
                })
                .count() as u64;
            Ok(ExactProb::counted(count, cells as u32, method))
        }
        Method::ClosedForm => {
            let mut acc = BigRational::one();
            for &vi in v.entries() {
                acc *= prob_sum_mod(t, vi, q, method)?.exact.expect("closed form is exact");
            }
            Ok(ExactProb::exact(acc, method))
        }
        Method::Fourier => {
            let mut acc = 1.0;
            for &vi in v.entries() {
                acc *= prob_sum_mod(t, vi, q, method)?.approx;
            }
            Ok(ExactProb::approximate(acc, method))
        }
    }
}

/// Walks all graphs on `m` vertices in Gray-code order over the edge bits,
/// calling `visit` with the current degree residues after each step
/// (including the empty graph first).
fn walk_graphs(m: usize, q: u32, mut visit: impl FnMut(&[u32])) {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
    let mut present = vec![false; pairs.len()];
    let mut deg = vec![0u32; m];
    visit(&deg);
    for step in 1u64..(1u64 << pairs.len()) {
        let e = step.trailing_zeros() as usize;
        let (i, j) = pairs[e];
        present[e] = !present[e];
        if present[e] {
            deg[i] = if deg[i] + 1 == q { 0 } else { deg[i] + 1 };
            deg[j] = if deg[j] + 1 == q { 0 } else { deg[j] + 1 };
        } else {
            deg[i] = if deg[i] == 0 { q - 1 } else { deg[i] - 1 };
            deg[j] = if deg[j] == 0 { q - 1 } else { deg[j] - 1 };
        }
        visit(&deg);
    }
}

fn graph_enum_cap(m: usize) -> Result<u32> {
    let edges = m * m.saturating_sub(1) / 2;
    if edges > GRAPH_ENUM_CAP {
        return capacity(format!(
            "enumerating graphs on {m} vertices needs 2^{edges} > 2^{GRAPH_ENUM_CAP} steps"
        ));
    }
    Ok(edges as u32)
}

/// Base-`q` index of a residue vector (entry 0 least significant).
pub fn vector_index(entries: &[u32], q: u32) -> usize {
    entries.iter().rev().fold(0usize, |acc, &e| acc * q as usize + e as usize)
}

/// Inverse of [`vector_index`].
pub fn vector_from_index(mut idx: usize, m: usize, q: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = (idx % q as usize) as u32;
            idx /= q as usize;
            d
        })
        .collect()
}

/// Number of graphs on `m` vertices with each degree vector mod `q`, indexed
/// by [`vector_index`]; the total is `2^{C(m,2)}`.
pub fn symmetric_histogram(m: usize, q: u32) -> Result<Vec<u64>> {
    check_q(q)?;
    graph_enum_cap(m)?;
    fourier_cap(q, m)?;
    let mut hist = vec![0u64; (q as usize).pow(m as u32)];
    let weights: Vec<usize> = (0..m).map(|i| (q as usize).pow(i as u32)).collect();
    walk_graphs(m, q, |deg| {
        let idx: usize = deg.iter().zip(&weights).map(|(&d, &w)| d as usize * w).sum();
        hist[idx] += 1;
    });
    Ok(hist)
}

/// `Π_{j<k} (1 + e_q(ℓ_j + ℓ_k))/2`.
#[inline]
fn symmetric_character(l: &[u32], pair: &[Vec<Complex64>]) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for j in 0..l.len() {
        let row = &pair[l[j] as usize];
        for k in (j + 1)..l.len() {
            prod *= row[l[k] as usize];
        }
    }
    prod
}

fn pair_table(q: u32, roots: &RootTable) -> Vec<Vec<Complex64>> {
    (0..q as i64)
        .map(|a| (0..q as i64).map(|b| roots.half_shift(a + b)).collect())
        .collect()
}

/// The degree-vector distribution for all `v ∈ Z_q^m` from the character
/// sum, computed as an `m`-dimensional DFT of the character products.
pub fn symmetric_distribution_fourier(m: usize, q: u32) -> Result<Vec<f64>> {
    check_q(q)?;
    fourier_cap(q, m)?;
    let roots = RootTable::new(q);
    let pair = pair_table(q, &roots);
    let size = (q as usize).pow(m as u32);
    let mut data: Vec<Complex64> = (0..size)
        .map(|idx| symmetric_character(&vector_from_index(idx, m, q), &pair))
        .collect();
    let qs = q as usize;
    let mut buf = vec![Complex64::zero(); qs];
    for axis in 0..m {
        let stride = qs.pow(axis as u32);
        for base in 0..size {
            if !(base / stride).is_multiple_of(qs) {
                continue;
            }
            for (vi, slot) in buf.iter_mut().enumerate() {
                let mut acc = CompensatedSum::default();
                for li in 0..qs {
                    acc.add(roots.e(-((li * vi) as i64)) * data[base + li * stride]);
                }
                *slot = acc.total();
            }
            for (vi, &val) in buf.iter().enumerate() {
                data[base + vi * stride] = val;
            }
        }
    }
    let scale = 1.0 / size as f64;
    Ok(data.into_iter().map(|z| (z.re * scale).clamp(0.0, 1.0)).collect())
}

/// The raw character sum for one `v`, without the parity short-cut.
pub(crate) fn symmetric_fourier_raw(v: &ResidueVector) -> f64 {
    let (m, q) = (v.len(), v.q());
    let roots = RootTable::new(q);
    let pair = pair_table(q, &roots);
    let mut l = vec![0u32; m];
    let mut acc = CompensatedSum::default();
    loop {
        let dot: i64 = l.iter().zip(v.entries()).map(|(&a, &b)| a as i64 * b as i64).sum();
        acc.add(roots.e(-dot) * symmetric_character(&l, &pair));
        if !next_vector(&mut l, q) {
            break;
        }
    }
    acc.total().re / (q as f64).powi(m as i32)
}

/// Probability that a uniform graph on `m = |v|` vertices has degree vector
/// `≡ v (mod q)`.
pub fn prob_symmetric(v: &ResidueVector, method: Method) -> Result<ExactProb> {
    let (m, q) = (v.len(), v.q());
    if m == 0 {
        return domain("prob_symmetric needs m >= 1");
    }
    match method {
        Method::Enumeration => {
            let edges = graph_enum_cap(m)?;
            let target = v.entries();
            let mut mismatched = target.iter().filter(|&&t| t != 0).count();
            let mut count = 0u64;
            // Same Gray walk as walk_graphs, tracking how many degrees miss.
            let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
            let mut present = vec![false; pairs.len()];
            let mut deg = vec![0u32; m];
            if mismatched == 0 {
                count += 1;
            }
            for step in 1u64..(1u64 << edges) {
                let e = step.trailing_zeros() as usize;
                present[e] = !present[e];
                let delta = if present[e] { 1 } else { q - 1 };
                let (i, j) = pairs[e];
                for x in [i, j] {
                    let before = deg[x] == target[x];
                    deg[x] = (deg[x] + delta) % q;
                    let after = deg[x] == target[x];
                    match (before, after) {
                        (true, false) => mismatched += 1,
                        (false, true) => mismatched -= 1,
                        _ => {}
                    }
                }
                if mismatched == 0 {
                    count += 1;
                }
            }
            Ok(ExactProb::counted(count, edges, method))
        }
        Method::Fourier => {
            fourier_cap(q, m)?;
            if q % 2 == 0 && v.entries().iter().map(|&x| x as u64).sum::<u64>() % 2 == 1 {
                return Ok(ExactProb::zero(method));
            }
            Ok(ExactProb::approximate(symmetric_fourier_raw(v), method))
        }
        Method::ClosedForm => unsupported("prob_symmetric", method),
    }
}

/// `P[1_sᵀM ≡ vᵀ and M·1_t ≡ u]` for an `s×t` iid Bernoulli(1/2) matrix with
/// `s = |u|`, `t = |v|`.
pub fn prob_joint(u: &ResidueVector, v: &ResidueVector, method: Method) -> Result<ExactProb> {
    let q = u.q();
    if v.q() != q {
        return domain(format!("row residues are mod {q} but column residues mod {}", v.q()));
    }
    let (s, t) = (u.len(), v.len());
    if s == 0 || t == 0 {
        return domain("prob_joint needs s, t >= 1");
    }
    match method {
        Method::Enumeration => {
            let cells = s * t;
            if cells > MATRIX_ENUM_CAP {
                return capacity(format!("enumerating {s}x{t} matrices exceeds s*t <= {MATRIX_ENUM_CAP}"));
            }
            let row_mask = (1u64 << t) - 1;
            let col_masks: Vec<u64> = (0..t)
                .map(|k| (0..s).fold(0u64, |acc, j| acc | 1 << (j * t + k)))
                .collect();
            let count = (0u64..1 << cells)
                .filter(|&m| {
                    u.entries()
                        .iter()
                        .enumerate()
                        .all(|(j, &uj)| ((m >> (j * t)) & row_mask).count_ones() % q == uj)
                        && v
                            .entries()
                            .iter()
                            .zip(&col_masks)
                            .all(|(&vk, &cm)| (m & cm).count_ones() % q == vk)
                })
                .count() as u64;
            Ok(ExactProb::counted(count, cells as u32, method))
        }
        Method::Fourier => {
            fourier_cap(q, s + t)?;
            if u.sum_mod() != v.sum_mod() {
                return Ok(ExactProb::zero(method));
            }
            let roots = RootTable::new(q);
            let pair = pair_table(q, &roots);
            let mut l = vec![0u32; s];
            let mut acc = CompensatedSum::default();
            loop {
                let lu: i64 = l.iter().zip(u.entries()).map(|(&a, &b)| a as i64 * b as i64).sum();
                let mut mm = vec![0u32; t];
                loop {
                    let vm: i64 = mm.iter().zip(v.entries()).map(|(&a, &b)| a as i64 * b as i64).sum();
                    let mut prod = roots.e(-(vm + lu));
                    for &lj in &l {
                        let row = &pair[lj as usize];
                        for &mk in &mm {
                            prod *= row[mk as usize];
                        }
                    }
                    acc.add(prod);
                    if !next_vector(&mut mm, q) {
                        break;
                    }
                }
                if !next_vector(&mut l, q) {
                    break;
                }
            }
            Ok(ExactProb::approximate(
                acc.total().re / (q as f64).powi((s + t) as i32),
                method,
            ))
        }
        Method::ClosedForm => unsupported("prob_joint", method),
    }
}

/// `max_{1≤ℓ<q} |cos(πℓ/q)| − e^{−2/q²}`; never positive.
pub fn cosine_gap(q: u32) -> Result<f64> {
    check_q(q)?;
    let qf = q as f64;
    let max_cos = (1..q)
        .map(|l| {
            // cos(π/2) is exactly zero; the float evaluation is 6e-17.
            if 2 * l == q {
                0.0
            } else {
                (std::f64::consts::PI * l as f64 / qf).cos().abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(max_cos - (-2.0 / (qf * qf)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayMode {
    /// Degree vectors of uniform graphs on `m` vertices.
    Symmetric,
    /// Row sums of a single row of length `m`.
    Asym,
}

impl fmt::Display for DecayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayMode::Symmetric => "symmetric",
            DecayMode::Asym => "asym",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub m: usize,
    pub q: u32,
    pub mode: DecayMode,
    pub normalized_error: f64,
}

/// `q^m · max_v |P(v) − lead(v)|` per `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
}

impl DecayProfile {
    /// CSV with header `m,q,mode,normalized_error`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    /// Slope of a least-squares fit of `ln(error)` against `m`.
    pub fn log_linear_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.normalized_error > 0.0)
            .map(|r| (r.m as f64, r.normalized_error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Largest row length accepted by the asym decay mode.
const ASYM_DECAY_CAP: usize = 4096;

fn symmetric_decay(m: usize, q: u32) -> Result<f64> {
    let qm = (q as u64).pow(m as u32);
    let even = q.is_multiple_of(2);
    let lead_num: u64 = if even { 2 } else { 1 };
    let edges = m * m.saturating_sub(1) / 2;
    if edges <= GRAPH_ENUM_CAP {
        let hist = symmetric_histogram(m, q)?;
        let total = 1i128 << edges;
        let mut worst = 0i128;
        for (idx, &c) in hist.iter().enumerate() {
            if even && vector_from_index(idx, m, q).iter().map(|&x| x as u64).sum::<u64>() % 2 == 1 {
                continue;
            }
            worst = worst.max((c as i128 * qm as i128 - lead_num as i128 * total).abs());
        }
        return Ok(ratio_to_f64(&BigRational::new(BigInt::from(worst), BigInt::from(total))));
    }
    let dist = symmetric_distribution_fourier(m, q)?;
    let lead = lead_num as f64 / qm as f64;
    Ok(dist
        .iter()
        .enumerate()
        .filter(|(idx, _)| !even || vector_from_index(*idx, m, q).iter().map(|&x| x as u64).sum::<u64>() % 2 == 0)
        .map(|(_, &p)| (p - lead).abs() * qm as f64)
        .fold(0.0, f64::max))
}

fn asym_decay(m: usize, q: u32) -> Result<f64> {
    if m > ASYM_DECAY_CAP {
        return capacity(format!("asym decay row length {m} exceeds {ASYM_DECAY_CAP}"));
    }
    let third = BigRational::new(BigInt::one(), BigInt::from(q));
    let mut worst = BigRational::zero();
    for a in 0..q {
        let p = prob_sum_mod(m as u64, a, q, Method::ClosedForm)?.exact.expect("exact");
        let d = (p - &third).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(ratio_to_f64(&(worst * BigRational::from_integer(BigInt::from(q)))))
}

/// Normalised error of the leading-term approximation for `m_min..=m_max`.
/// Leading terms: `1/q^m` for odd `q`; `2/q^m` on even-sum `v` for even `q`
/// (symmetric mode); `1/q` per row (asym mode).
pub fn decay_profile(q: u32, m_min: usize, m_max: usize, mode: DecayMode) -> Result<DecayProfile> {
    check_q(q)?;
    if m_min == 0 || m_min > m_max {
        return domain(format!("need 1 <= m_min <= m_max, got {m_min}..{m_max}"));
    }
    let rows = (m_min..=m_max)
        .map(|m| {
            let normalized_error = match mode {
                DecayMode::Symmetric => symmetric_decay(m, q)?,
                DecayMode::Asym => asym_decay(m, q)?,
            };
            Ok(DecayRow {
                m,
                q,
                mode,
                normalized_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayProfile { rows })
}

/// Proven bound `((q−1)/q)·e^{−2n/q²}` on `|P[Σξ ≡ a] − 1/q|`.
pub fn sum_mod_error_bound(n: u64, q: u32) -> f64 {
    let qf = q as f64;
    (qf - 1.0) / qf * (-2.0 * n as f64 / (qf * qf)).exp()
}

/// `max_a |P[Σξ ≡ a] − 1/q|` computed exactly.
pub fn sum_mod_max_error(n: u64, q: u32) -> Result<BigRational> {
    let lead = BigRational::new(BigInt::one(), BigInt::from(q));
    let mut worst = BigRational::zero();
    for a in 0..q {
        let p = prob_sum_mod(n, a, q, Method::ClosedForm)?.exact.expect("exact");
        worst = worst.max((p - &lead).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(q: u32, e: &[u32]) -> ResidueVector {
        ResidueVector::new(q, e.to_vec()).unwrap()
    }

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn sum_mod_examples() {
        for method in [Method::ClosedForm, Method::Enumeration] {
            assert_eq!(prob_sum_mod(0, 0, 5, method).unwrap().exact, Some(frac(1, 1)));
            assert_eq!(prob_sum_mod(2, 0, 3, method).unwrap().exact, Some(frac(1, 4)));
            assert_eq!(prob_sum_mod(1, 0, 2, method).unwrap().exact, Some(frac(1, 2)));
        }
        assert!((prob_sum_mod(2, 0, 3, Method::Fourier).unwrap().approx - 0.25).abs() < 1e-12);
        assert!(prob_sum_mod(3, 3, 3, Method::Fourier).is_err());
        assert!(prob_sum_mod(30, 0, 3, Method::Enumeration).is_err());
    }

    #[test]
    fn sum_mod_routes_agree() {
        for q in 2..=7 {
            for n in 0..=20u64 {
                for a in 0..q {
                    let c = prob_sum_mod(n, a, q, Method::ClosedForm).unwrap();
                    let e = prob_sum_mod(n, a, q, Method::Enumeration).unwrap();
                    let f = prob_sum_mod(n, a, q, Method::Fourier).unwrap();
                    assert_eq!(c.exact, e.exact);
                    assert!((c.approx - f.approx).abs() < 1e-12, "q={q} n={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn asym_examples() {
        let p = prob_asym_rowsums(0, &rv(3, &[0, 0]), Method::Enumeration).unwrap();
        assert_eq!(p.exact, Some(frac(1, 1)));
        let p = prob_asym_rowsums(2, &rv(3, &[0, 0]), Method::Enumeration).unwrap();
        assert_eq!(p.exact, Some(frac(1, 16)));
        let p = prob_asym_rowsums(3, &rv(2, &[1]), Method::ClosedForm).unwrap();
        assert_eq!(p.exact, Some(frac(1, 2)));
        assert!(prob_asym_rowsums(5, &rv(2, &[0, 0, 0, 0, 0]), Method::Enumeration).is_err());
    }

    #[test]
    fn asym_row_product_identity() {
        for q in 2..=4 {
            for t in 0..=6u64 {
                for s in 1..=3usize {
                    if s as u64 * t > 18 {
                        continue;
                    }
                    let mut v = vec![0u32; s];
                    loop {
                        let vec = rv(q, &v);
                        let e = prob_asym_rowsums(t, &vec, Method::Enumeration).unwrap();
                        let c = prob_asym_rowsums(t, &vec, Method::ClosedForm).unwrap();
                        let f = prob_asym_rowsums(t, &vec, Method::Fourier).unwrap();
                        assert_eq!(e.exact, c.exact);
                        assert!((f.approx - c.approx).abs() < 1e-12);
                        if !next_vector(&mut v, q) {
                            break;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_examples() {
        for method in [Method::Enumeration, Method::Fourier] {
            let p = prob_symmetric(&rv(2, &[1, 0, 0]), method).unwrap();
            assert!(p.is_exact_zero());
        }
        let p = prob_symmetric(&rv(2, &[1, 1, 0]), Method::Enumeration).unwrap();
        assert_eq!(p.exact, Some(frac(1, 4)));
        let p = prob_symmetric(&rv(3, &[0, 0, 0]), Method::Enumeration).unwrap();
        assert_eq!(p.exact, Some(frac(1, 8)));
        // Frozen from an independent Python enumeration of all 2^15 graphs.
        let p = prob_symmetric(&rv(3, &[0; 6]), Method::Enumeration).unwrap();
        assert_eq!(p.exact, Some(frac(43, 16384)));
        let f = prob_symmetric(&rv(3, &[0; 6]), Method::Fourier).unwrap();
        assert!((f.approx - 43.0 / 16384.0).abs() < 1e-12);
        assert!(prob_symmetric(&rv(2, &[0; 9]), Method::Enumeration).is_err());
        assert!(prob_symmetric(&rv(2, &[0; 3]), Method::ClosedForm).is_err());
    }

    #[test]
    fn parity_short_cut_matches_raw_sum() {
        for v in [[1u32, 0, 0, 0], [1, 1, 1, 0], [3, 0, 0, 0]] {
            assert!(symmetric_fourier_raw(&rv(4, &v)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_routes_and_normalisation() {
        for q in 2..=5u32 {
            for m in 1..=5usize {
                let hist = symmetric_histogram(m, q).unwrap();
                let dist = symmetric_distribution_fourier(m, q).unwrap();
                assert_eq!(hist.iter().sum::<u64>(), 1 << (m * (m - 1) / 2));
                assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let total = (1u64 << (m * (m - 1) / 2)) as f64;
                for (idx, &c) in hist.iter().enumerate() {
                    let v = rv(q, &vector_from_index(idx, m, q));
                    let f = prob_symmetric(&v, Method::Fourier).unwrap().approx;
                    let e = prob_symmetric(&v, Method::Enumeration).unwrap();
                    assert_eq!(e.exact, Some(BigRational::new(BigInt::from(c), BigInt::from(total as u64))));
                    assert!((f - c as f64 / total).abs() < 1e-9);
                    assert!((dist[idx] - c as f64 / total).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn joint_examples() {
        for method in [Method::Enumeration, Method::Fourier] {
            let p = prob_joint(&rv(2, &[1]), &rv(2, &[1, 1]), method).unwrap();
            assert!(p.is_exact_zero());
            let p = prob_joint(&rv(2, &[0]), &rv(2, &[1, 1]), method).unwrap();
            assert!((p.approx - 0.25).abs() < 1e-12);
            let p = prob_joint(&rv(2, &[0, 0]), &rv(2, &[0, 0]), method).unwrap();
            // Only the empty and the full 2x2 matrix.
            assert!((p.approx - 2.0 / 16.0).abs() < 1e-12);
        }
        assert!(prob_joint(&rv(2, &[0]), &rv(3, &[0]), Method::Enumeration).is_err());
    }

    #[test]
    fn cosine_gap_examples() {
        assert!((cosine_gap(2).unwrap() + (-0.5f64).exp()).abs() < 1e-15);
        assert!((cosine_gap(3).unwrap() - (0.5 - (-2.0f64 / 9.0).exp())).abs() < 1e-15);
        for q in 2..=1000 {
            assert!(cosine_gap(q).unwrap() <= 0.0, "q={q}");
        }
    }

    #[test]
    fn decay_examples() {
        let p = decay_profile(2, 3, 3, DecayMode::Symmetric).unwrap();
        assert_eq!(p.rows[0].normalized_error, 0.0);
        let a = decay_profile(3, 1, 1, DecayMode::Asym).unwrap();
        // One fair bit: P(0) = P(1) = 1/2, P(2) = 0, so 3·max|P − 1/3| = 1.
        assert!((a.rows[0].normalized_error - 1.0).abs() < 1e-15);
        let s = decay_profile(3, 4, 7, DecayMode::Symmetric).unwrap();
        assert!(s.rows.iter().all(|r| r.normalized_error > 0.0));
        assert!(s.log_linear_slope().unwrap() < 0.0);
        assert!(p.to_csv().starts_with("m,q,mode,normalized_error\n3,2,symmetric,0"));
    }

    #[test]
    fn sum_mod_bound_holds() {
        for q in 2..=6 {
            for n in 1..=40 {
                let err = ratio_to_f64(&sum_mod_max_error(n, q).unwrap());
                assert!(err <= sum_mod_error_bound(n, q) + 1e-12);
            }
        }
    }
}
