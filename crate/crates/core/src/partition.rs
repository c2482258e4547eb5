//! (r,q)-partitions: minimum part counts, exact counts of balanced good
//! partitions, heuristic search, and the overlap statistic of two balanced
//! partitions.
//!
//! Partitions are ordered: part labels matter. Balanced partitions use the
//! canonical shape in which the first `n mod t` parts have `⌈n/t⌉` vertices
//! and the rest `⌊n/t⌋`.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::multinomial;
use crate::error::{capacity, domain, Result};
use crate::graph::{is_good, BitIter, Graph, ModParams, VertexSet};
use crate::rng::{derive_seed, SplitMix64};

/// Largest `n` for [`exact_min_parts`].
pub const MIN_PARTS_CAP: usize = 12;
/// Largest `n` and `t` for [`count_balanced_good`].
pub const BALANCED_N_CAP: usize = 16;
pub const BALANCED_T_CAP: usize = 5;

/// Ordered sequence of disjoint vertex sets covering `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<VertexSet>,
}

impl Partition {
    /// Validates disjointness and coverage of `[n]`.
    pub fn new(n: usize, parts: Vec<VertexSet>) -> Result<Self> {
        if parts.is_empty() {
            return domain("a partition needs at least one part");
        }
        let mut seen = VertexSet::new();
        for (i, p) in parts.iter().enumerate() {
            p.check_within(n)?;
            if !seen.is_disjoint(p) {
                return domain(format!("part {i} overlaps an earlier part"));
            }
            for v in p.iter() {
                seen.insert(v);
            }
        }
        if seen.len() != n {
            return domain(format!("parts cover {} of {n} vertices", seen.len()));
        }
        Ok(Self { parts })
    }

    /// Builds the partition in which vertex `v` lies in part `labels[v]`.
    pub fn from_labels(labels: &[usize], t: usize) -> Result<Self> {
        let mut parts = vec![VertexSet::new(); t];
        for (v, &l) in labels.iter().enumerate() {
            if l >= t {
                return domain(format!("label {l} of vertex {v} is not below t={t}"));
            }
            parts[l].insert(v);
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn t(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    /// Every part size in `{⌊n/t⌋, ⌈n/t⌉}`.
    pub fn is_balanced(&self) -> bool {
        let (n, t) = (self.n(), self.t());
        let (lo, hi) = (n / t, n.div_ceil(t));
        self.parts.iter().all(|p| (lo..=hi).contains(&p.len()))
    }

    /// Recomputes goodness of every part from scratch. Empty parts are
    /// accepted only when balance forces them (`n < t`).
    pub fn parts_good(&self, g: &Graph, mp: ModParams) -> Result<bool> {
        let forced_empty = self.n() < self.t();
        for p in &self.parts {
            if p.is_empty() {
                if !forced_empty {
                    return Ok(false);
                }
            } else if !is_good(g, p, mp)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Full re-verification: coverage of `[G.n]`, disjointness, balance and
    /// goodness of every part.
    pub fn verify_balanced(&self, g: &Graph, mp: ModParams) -> Result<bool> {
        if Partition::new(g.n(), self.parts.clone()).is_err() {
            return Ok(false);
        }
        Ok(self.is_balanced() && self.parts_good(g, mp)?)
    }
}

/// Canonical balanced sizes: `n mod t` parts of `⌈n/t⌉` first.
pub fn balanced_sizes(n: usize, t: usize) -> Vec<usize> {
    (0..t).map(|i| n / t + usize::from(i < n % t)).collect()
}

/// `M(n, t)`, the number of ordered balanced partitions of `[n]` into `t`
/// labelled parts.
pub fn balanced_count(n: usize, t: usize) -> Result<BigUint> {
    if t == 0 {
        return domain("t must be at least 1");
    }
    let sizes: Vec<u64> = balanced_sizes(n, t).into_iter().map(|s| s as u64).collect();
    Ok(multinomial(&sizes))
}

/// `good[mask]` for every subset of `[n]`, `n ≤ 26`; `good[0]` is false.
fn good_table(g: &Graph, mp: ModParams) -> Vec<bool> {
    let n = g.n();
    let rows: Vec<u64> = (0..n).map(|i| g.row_word(i)).collect();
    let (q, r) = (mp.q(), mp.r());
    (0u64..1 << n)
        .map(|mask| mask != 0 && BitIter(mask).all(|v| (rows[v] & mask).count_ones() % q == r))
        .collect()
}

/// Whether `rest` splits into exactly `parts` good sets.
fn splits_into(good: &[bool], rest: u64, parts: usize) -> bool {
    if rest == 0 {
        return parts == 0;
    }
    if parts == 0 {
        return false;
    }
    if parts == 1 {
        return good[rest as usize];
    }
    // The part holding the lowest remaining vertex; fixing it makes every
    // unordered partition appear once.
    let low = rest & rest.wrapping_neg();
    let others = rest ^ low;
    let mut sub = others;
    loop {
        let part = sub | low;
        if good[part as usize] && splits_into(good, rest ^ part, parts - 1) {
            return true;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
    false
}

/// `p(G, r, q)` if it is at most `cap`, else `None`.
pub fn exact_min_parts(g: &Graph, mp: ModParams, cap: usize) -> Result<Option<usize>> {
    let n = g.n();
    if n > MIN_PARTS_CAP {
        return capacity(format!("exact partition search needs n <= {MIN_PARTS_CAP}, got {n}"));
    }
    if n == 0 {
        return Ok(Some(0));
    }
    // More than n nonempty parts cannot exist, so a larger cap changes nothing.
    let cap = cap.min(n);
    let good = good_table(g, mp);
    let full = (1u64 << n) - 1;
    Ok((1..=cap).find(|&t| splits_into(&good, full, t)))
}

/// Number of ordered balanced `t`-tuples of good parts with the canonical
/// shape.
pub fn count_balanced_good(g: &Graph, mp: ModParams, t: usize) -> Result<u64> {
    let n = g.n();
    if t == 0 {
        return domain("t must be at least 1");
    }
    if n > BALANCED_N_CAP || t > BALANCED_T_CAP {
        return capacity(format!(
            "balanced counting needs n <= {BALANCED_N_CAP} and t <= {BALANCED_T_CAP}, got n={n}, t={t}"
        ));
    }
    let sizes = balanced_sizes(n, t);
    let good = good_table(g, mp);
    let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); n + 1];
    for (mask, &ok) in good.iter().enumerate() {
        if ok {
            by_size[(mask as u64).count_ones() as usize].push(mask as u64);
        }
    }
    // Nonempty parts come first in the canonical shape, so once `rest` is
    // empty every remaining part is a forced empty one.
    let mut memo: Vec<Option<u64>> = vec![None; 1 << n];
    fn count(rest: u64, i: usize, sizes: &[usize], by_size: &[Vec<u64>], memo: &mut [Option<u64>]) -> u64 {
        if i == sizes.len() || sizes[i] == 0 {
            return u64::from(rest == 0);
        }
        if let Some(c) = memo[rest as usize] {
            return c;
        }
        let c = by_size[sizes[i]]
            .iter()
            .filter(|&&s| s & !rest == 0)
            .map(|&s| count(rest ^ s, i + 1, sizes, by_size, memo))
            .sum();
        memo[rest as usize] = Some(c);
        c
    }
    Ok(count((1u64 << n) - 1, 0, &sizes, &by_size, &mut memo))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSearchParams {
    pub max_steps: u64,
    pub restarts: u32,
    pub seed: u64,
    /// Steps without a new best objective before a restart is abandoned.
    pub plateau_tolerance: u64,
}

impl Default for PartitionSearchParams {
    fn default() -> Self {
        Self {
            max_steps: 20_000,
            restarts: 16,
            seed: 0,
            plateau_tolerance: 5_000,
        }
    }
}

/// Restarts launched together; the lowest-index success within the first
/// batch that has one wins, independent of scheduling.
const RESTART_BATCH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOutcome {
    /// Present only if found and re-verified.
    pub partition: Option<Partition>,
    /// Least number of misplaced vertices seen.
    pub best_objective: u64,
    pub steps: u64,
    pub restarts_used: u32,
}

impl PartitionOutcome {
    pub fn success(&self) -> bool {
        self.partition.is_some()
    }
}

type Bits<const W: usize> = [u64; W];

#[inline]
fn pop<const W: usize>(b: &Bits<W>) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

#[inline]
fn bit<const W: usize>(b: &Bits<W>, v: usize) -> bool {
    b[v / 64] >> (v % 64) & 1 == 1
}

#[inline]
fn flip<const W: usize>(b: &mut Bits<W>, v: usize, on: bool) {
    if on {
        b[v / 64] |= 1 << (v % 64);
    } else {
        b[v / 64] &= !(1 << (v % 64));
    }
}

/// Local-search state. Each vertex's degree inside its own part is tracked
/// through three bit planes: residue `r` (good), `r−1` (one more neighbour
/// would make it good) and `r+1` (one fewer would). A swap then changes the
/// goodness of whole parts by a handful of word operations.
struct PartState<const W: usize> {
    t: usize,
    q: u32,
    r: u32,
    adj: Vec<Bits<W>>,
    parts: Vec<Bits<W>>,
    label: Vec<usize>,
    /// `cnt[v*t + p]`: neighbours of `v` in part `p`.
    cnt: Vec<u32>,
    good: Bits<W>,
    up: Bits<W>,
    down: Bits<W>,
    bad: i64,
}

impl<const W: usize> PartState<W> {
    fn new(g: &Graph, t: usize, mp: ModParams, label: Vec<usize>) -> Self {
        let n = g.n();
        let mut adj = vec![[0u64; W]; n];
        for (v, row) in adj.iter_mut().enumerate() {
            row[..g.row(v).len()].copy_from_slice(g.row(v));
        }
        let mut parts = vec![[0u64; W]; t];
        for (v, &l) in label.iter().enumerate() {
            flip(&mut parts[l], v, true);
        }
        let mut cnt = vec![0u32; n * t];
        for v in 0..n {
            for p in 0..t {
                cnt[v * t + p] = (0..W).map(|i| (adj[v][i] & parts[p][i]).count_ones()).sum();
            }
        }
        let mut st = Self {
            t,
            q: mp.q(),
            r: mp.r(),
            adj,
            parts,
            label,
            cnt,
            good: [0; W],
            up: [0; W],
            down: [0; W],
            bad: 0,
        };
        for v in 0..n {
            st.refresh(v);
        }
        st.bad = n as i64 - pop(&st.good) as i64;
        st
    }

    #[inline]
    fn own(&self, v: usize) -> u32 {
        self.cnt[v * self.t + self.label[v]] % self.q
    }

    fn refresh(&mut self, v: usize) {
        let (q, r, res) = (self.q, self.r, self.own(v));
        flip(&mut self.good, v, res == r);
        flip(&mut self.up, v, (res + 1) % q == r);
        flip(&mut self.down, v, (res + q - 1) % q == r);
    }

    #[inline]
    fn is_bad(&self, v: usize) -> bool {
        !bit(&self.good, v)
    }

    /// Good vertices among `base`, after each of `plus` gains a neighbour and
    /// each of `minus` loses one.
    #[inline]
    fn good_after(&self, base: &Bits<W>, plus: &Bits<W>, minus: &Bits<W>) -> u32 {
        let mut c = 0;
        for i in 0..W {
            let same = base[i] & !(plus[i] | minus[i]);
            c += ((self.good[i] & same) | (self.up[i] & plus[i]) | (self.down[i] & minus[i])).count_ones();
        }
        c
    }

    /// Change in the number of bad vertices if `u` moves to part `b` and,
    /// when given, `v` (in part `b`) moves to `u`'s part.
    fn delta(&self, u: usize, b: usize, v: Option<usize>) -> i64 {
        let a = self.label[u];
        let t = self.t;
        let nu = &self.adj[u];
        let none = [0u64; W];
        let nv = v.map_or(&none, |v| &self.adj[v]);
        let mut rest_a = self.parts[a];
        flip(&mut rest_a, u, false);
        let mut rest_b = self.parts[b];
        if let Some(v) = v {
            flip(&mut rest_b, v, false);
        }
        let mut plus_a = [0u64; W];
        let mut minus_a = [0u64; W];
        let mut plus_b = [0u64; W];
        let mut minus_b = [0u64; W];
        let mut old = 0;
        for i in 0..W {
            plus_a[i] = rest_a[i] & nv[i] & !nu[i];
            minus_a[i] = rest_a[i] & nu[i] & !nv[i];
            plus_b[i] = rest_b[i] & nu[i] & !nv[i];
            minus_b[i] = rest_b[i] & nv[i] & !nu[i];
            old += (self.good[i] & (self.parts[a][i] | self.parts[b][i])).count_ones();
        }
        let mut new = self.good_after(&rest_a, &plus_a, &minus_a) + self.good_after(&rest_b, &plus_b, &minus_b);
        let uv = v.is_some_and(|v| bit(nu, v)) as u32;
        new += ((self.cnt[u * t + b] - uv) % self.q == self.r) as u32;
        if let Some(v) = v {
            new += ((self.cnt[v * t + a] - uv) % self.q == self.r) as u32;
        }
        old as i64 - new as i64
    }

    fn apply_move(&mut self, u: usize, b: usize) {
        let a = self.label[u];
        let t = self.t;
        flip(&mut self.parts[a], u, false);
        flip(&mut self.parts[b], u, true);
        self.label[u] = b;
        let nbrs = self.adj[u];
        for (i, &word) in nbrs.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let x = i * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                self.cnt[x * t + a] -= 1;
                self.cnt[x * t + b] += 1;
                self.refresh(x);
            }
        }
        self.refresh(u);
    }

    fn recount(&mut self) {
        self.bad = self.label.len() as i64 - pop(&self.good) as i64;
    }
}

/// Added to the score of a tabu move.
const TABU_PENALTY: i64 = 1 << 20;

fn run_restart_bits<const W: usize>(
    g: &Graph,
    mp: ModParams,
    t: usize,
    params: &PartitionSearchParams,
    seed: u64,
) -> (Option<Vec<usize>>, u64, u64) {
    let n = g.n();
    let mut rng = SplitMix64::new(seed);
    let label = initial_labels(n, t, &mut rng);
    let mut st = PartState::<W>::new(g, t, mp, label);
    let (lo, hi) = (n / t, n.div_ceil(t));
    let mut best = st.bad;
    let mut tabu_until = vec![0u64; n];
    let tenure = (n as u64 / 10).max(2);
    let mut since_improved = 0u64;
    let mut steps = 0u64;
    while st.bad > 0 && steps < params.max_steps && since_improved <= params.plateau_tolerance {
        steps += 1;
        let mut best_d = i64::MAX;
        let mut chosen: Option<(usize, Option<usize>, usize)> = None;
        let mut ties = 0u32;
        for u in (0..n).filter(|&u| st.is_bad(u)) {
            let a = st.label[u];
            for p in 0..t {
                if p == a {
                    continue;
                }
                // Relocation keeps every size within {lo, hi}.
                let mut cands: Vec<Option<usize>> = Vec::new();
                if st.sizes_allow(a, p, lo, hi) {
                    cands.push(None);
                }
                let members = st.parts[p];
                for (i, &word) in members.iter().enumerate() {
                    let mut w = word;
                    while w != 0 {
                        cands.push(Some(i * 64 + w.trailing_zeros() as usize));
                        w &= w - 1;
                    }
                }
                for v in cands {
                    let d = st.delta(u, p, v);
                    let free = tabu_until[u] < steps && v.is_none_or(|v| tabu_until[v] < steps);
                    // Tabu moves are priced out rather than dropped, so a step
                    // always happens; aspiration waives the price.
                    let d = if free || st.bad + d < best { d } else { d + TABU_PENALTY };
                    if d < best_d {
                        best_d = d;
                        chosen = Some((u, v, p));
                        ties = 1;
                    } else if d == best_d {
                        ties += 1;
                        if rng.random_range(0..ties) == 0 {
                            chosen = Some((u, v, p));
                        }
                    }
                }
            }
        }
        let Some((u, other, p)) = chosen else { break };
        let stamp = steps + tenure + rng.random_range(0..tenure);
        let a = st.label[u];
        st.apply_move(u, p);
        if let Some(v) = other {
            st.apply_move(v, a);
            tabu_until[v] = stamp;
        }
        tabu_until[u] = stamp;
        st.recount();
        if st.bad < best {
            best = st.bad;
            since_improved = 0;
        } else {
            since_improved += 1;
        }
    }
    let found = (st.bad == 0).then(|| st.label.clone());
    (found, best as u64, steps)
}

impl<const W: usize> PartState<W> {
    #[inline]
    fn sizes_allow(&self, from: usize, to: usize, lo: usize, hi: usize) -> bool {
        pop(&self.parts[from]) as usize > lo && (pop(&self.parts[to]) as usize) < hi
    }
}

/// A uniformly random balanced labelling with the canonical shape.
fn initial_labels(n: usize, t: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let sizes = balanced_sizes(n, t);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut label = vec![0usize; n];
    let mut next = 0;
    for (p, &s) in sizes.iter().enumerate() {
        for &v in &order[next..next + s] {
            label[v] = p;
        }
        next += s;
    }
    label
}

/// Largest `n` for [`search_partition`].
pub const SEARCH_N_CAP: usize = 1024;

fn run_partition_restart(
    g: &Graph,
    mp: ModParams,
    t: usize,
    params: &PartitionSearchParams,
    seed: u64,
) -> (Option<Vec<usize>>, u64, u64) {
    match g.n() {
        0..=64 => run_restart_bits::<1>(g, mp, t, params, seed),
        65..=128 => run_restart_bits::<2>(g, mp, t, params, seed),
        129..=256 => run_restart_bits::<4>(g, mp, t, params, seed),
        257..=512 => run_restart_bits::<8>(g, mp, t, params, seed),
        _ => run_restart_bits::<16>(g, mp, t, params, seed),
    }
}

/// Seeded tabu search for a balanced partition into `t` good parts.
///
/// The objective counts vertices whose degree inside their own part is not
/// `r` mod `q`. Moves swap a misplaced vertex with a vertex of another part,
/// or relocate it when part sizes allow. The result, if any, has its parts
/// reordered into the canonical shape and is re-verified from scratch.
pub fn search_partition(g: &Graph, mp: ModParams, t: usize, params: &PartitionSearchParams) -> Result<PartitionOutcome> {
    if t == 0 {
        return domain("t must be at least 1");
    }
    if params.max_steps == 0 || params.restarts == 0 {
        return domain("max_steps and restarts must be at least 1");
    }
    let n = g.n();
    if n > SEARCH_N_CAP {
        return capacity(format!("partition search supports n <= {SEARCH_N_CAP}, got {n}"));
    }
    let mut best_objective = u64::MAX;
    let mut steps = 0u64;
    let mut start = 0u32;
    while start < params.restarts {
        let end = (start + RESTART_BATCH).min(params.restarts);
        let runs: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| run_partition_restart(g, mp, t, params, derive_seed(params.seed, i as u64)))
            .collect();
        for (i, (found, obj, s)) in runs.into_iter().enumerate() {
            best_objective = best_objective.min(obj);
            steps += s;
            if let Some(label) = found {
                let mut p = Partition::from_labels(&label, t)?;
                // Stable: larger parts first, original order among equals.
                p.parts.sort_by_key(|s| std::cmp::Reverse(s.len()));
                if p.verify_balanced(g, mp)? {
                    return Ok(PartitionOutcome {
                        partition: Some(p),
                        best_objective: 0,
                        steps,
                        restarts_used: start + i as u32 + 1,
                    });
                }
            }
        }
        start = end;
    }
    Ok(PartitionOutcome {
        partition: None,
        best_objective,
        steps,
        restarts_used: params.restarts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// `matrix[i][j] = |U_i ∩ V_j|`.
    pub matrix: Vec<Vec<usize>>,
    pub typical: bool,
}

/// Intersection counts of two partitions of the same `[n]` and whether every
/// one is at most `n/(3t)`.
pub fn overlap_typicality(u: &Partition, v: &Partition) -> Result<OverlapReport> {
    if u.n() != v.n() || u.t() != v.t() {
        return domain(format!(
            "partitions differ in shape: n={} t={} versus n={} t={}",
            u.n(),
            u.t(),
            v.n(),
            v.t()
        ));
    }
    let (n, t) = (u.n(), u.t());
    let matrix: Vec<Vec<usize>> = u
        .parts
        .iter()
        .map(|a| v.parts.iter().map(|b| a.intersection_len(b)).collect())
        .collect();
    let bound = n as f64 / (3.0 * t as f64);
    let typical = matrix.iter().flatten().all(|&c| c as f64 <= bound);
    Ok(OverlapReport { matrix, typical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_gnp;

    fn mp(r: u32, q: u32) -> ModParams {
        ModParams::new(r, q).unwrap()
    }

    #[test]
    fn min_parts_examples() {
        assert_eq!(exact_min_parts(&Graph::complete(2), mp(0, 2), 2).unwrap(), Some(2));
        assert_eq!(exact_min_parts(&Graph::empty(4), mp(0, 3), 4).unwrap(), Some(1));
        assert_eq!(exact_min_parts(&Graph::complete(2), mp(0, 2), 1).unwrap(), None);
        assert!(exact_min_parts(&Graph::empty(13), mp(0, 2), 2).is_err());
        assert_eq!(exact_min_parts(&Graph::empty(1), mp(0, 2), 2).unwrap(), Some(1));
        for seed in 0..30 {
            let g = sample_gnp(10, seed);
            assert!(exact_min_parts(&g, mp(0, 2), 2).unwrap().is_some());
        }
    }

    #[test]
    fn balanced_examples() {
        assert_eq!(balanced_count(4, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(balanced_count(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(balanced_count(7, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(balanced_sizes(5, 2), vec![3, 2]);
        assert_eq!(count_balanced_good(&Graph::empty(4), mp(0, 3), 2).unwrap(), 6);
        assert_eq!(count_balanced_good(&Graph::complete(2), mp(1, 2), 2).unwrap(), 0);
        assert_eq!(count_balanced_good(&Graph::complete(3), mp(0, 2), 1).unwrap(), 1);
        assert_eq!(count_balanced_good(&Graph::complete(3), mp(1, 2), 1).unwrap(), 0);
        // n < t: the forced empty parts are acceptable.
        assert_eq!(count_balanced_good(&Graph::empty(2), mp(0, 2), 3).unwrap(), 2);
        assert!(count_balanced_good(&Graph::empty(17), mp(0, 2), 2).is_err());
        assert!(count_balanced_good(&Graph::empty(4), mp(0, 2), 6).is_err());
    }

    #[test]
    fn balanced_count_matches_naive() {
        for seed in 0..10 {
            let g = sample_gnp(8, seed);
            for t in 1..=4 {
                let sizes = balanced_sizes(8, t);
                let mut naive = 0u64;
                // Every labelling of 8 vertices with t labels.
                for code in 0..(t as u64).pow(8) {
                    let labels: Vec<usize> = (0..8).map(|i| (code / (t as u64).pow(i)) as usize % t).collect();
                    let p = Partition::from_labels(&labels, t).unwrap();
                    if p.sizes() == sizes && p.parts_good(&g, mp(0, 2)).unwrap() {
                        naive += 1;
                    }
                }
                assert_eq!(count_balanced_good(&g, mp(0, 2), t).unwrap(), naive, "seed={seed} t={t}");
            }
        }
    }

    #[test]
    fn search_examples() {
        let p = PartitionSearchParams::default();
        let out = search_partition(&Graph::empty(9), mp(0, 2), 3, &p).unwrap();
        assert_eq!(out.steps, 0);
        assert!(out.partition.unwrap().verify_balanced(&Graph::empty(9), mp(0, 2)).unwrap());
        let k3 = Graph::complete(3);
        let out = search_partition(&k3, mp(0, 2), 3, &p).unwrap();
        assert_eq!(out.partition.unwrap().sizes(), vec![1, 1, 1]);
        let quick = PartitionSearchParams {
            max_steps: 50,
            restarts: 2,
            ..Default::default()
        };
        let out = search_partition(&Graph::complete(2), mp(1, 2), 2, &quick).unwrap();
        assert!(!out.success());
        assert!(out.best_objective > 0);
    }

    #[test]
    fn search_succeeds_when_count_positive() {
        for seed in 0..50 {
            let g = sample_gnp(12, seed);
            let m = mp(0, 2);
            let exact = count_balanced_good(&g, m, 3).unwrap();
            let p = PartitionSearchParams {
                seed,
                ..Default::default()
            };
            let out = search_partition(&g, m, 3, &p).unwrap();
            assert_eq!(out.success(), exact > 0, "seed={seed} count={exact}");
        }
    }

    #[test]
    fn overlap_examples() {
        let u = Partition::from_labels(&[0, 0, 0, 1, 1, 1, 2, 2, 2], 3).unwrap();
        let r = overlap_typicality(&u, &u).unwrap();
        assert_eq!(r.matrix, vec![vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3]]);
        assert!(!r.typical);
        // Latin square: V_j takes one vertex from each U_i.
        let v = Partition::from_labels(&[0, 1, 2, 1, 2, 0, 2, 0, 1], 3).unwrap();
        let r = overlap_typicality(&u, &v).unwrap();
        assert!(r.matrix.iter().flatten().all(|&c| c == 1));
        assert!(r.typical);
        let w = Partition::from_labels(&[0, 0, 1, 1], 2).unwrap();
        assert!(overlap_typicality(&u, &w).is_err());
    }

    #[test]
    fn partition_validation() {
        let a = VertexSet::from_vertices([0, 1]);
        let b = VertexSet::from_vertices([1, 2]);
        assert!(Partition::new(3, vec![a.clone(), b]).is_err());
        assert!(Partition::new(3, vec![a.clone()]).is_err());
        assert!(Partition::new(3, vec![a, VertexSet::from_vertices([2])]).is_ok());
    }
}
