//! Exhaustive and heuristic search for good induced subgraphs.
//!
//! The exhaustive engine fixes the top bits of the subset mask to split the
//! `2^n` subsets into independent slices, and walks each slice in Gray-code
//! order. Toggling vertex `x` touches only the neighbours of `x`: their
//! degree residues shift by one and, for members of `S`, the histogram of
//! member residues is adjusted. `S` is good iff the histogram has all of its
//! mass on `r`.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{capacity, domain, Result};
use crate::graph::{is_good, is_good_alpha, BitIter, Graph, ModParams, VertexSet};
use crate::rng::{derive_seed, SplitMix64};
use crate::thresholds::DistributionSpec;

/// Largest `n` for exhaustive enumeration.
pub const EXACT_CAP: usize = 26;

/// Number of top-bit slices used to split the walk; fixed so results never
/// depend on the worker count.
const SLICE_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_size: usize,
    pub witness: Option<VertexSet>,
    pub exact: bool,
    pub nodes_explored: u64,
}

impl SearchResult {
    fn none(exact: bool, nodes_explored: u64) -> Self {
        Self {
            best_size: 0,
            witness: None,
            exact,
            nodes_explored,
        }
    }
}

/// `a < b` in the order of sorted member lists, for sets of equal size.
#[inline]
fn lex_less(a: u64, b: u64) -> bool {
    let d = a ^ b;
    d != 0 && a & (d & d.wrapping_neg()) != 0
}

/// Membership test applied to the member-residue histogram.
enum Predicate {
    Residue(u32),
    /// Per-size `(lo, hi)` bounds for each residue class.
    Histogram(Vec<Vec<(u32, u32)>>),
}

impl Predicate {
    fn alpha(n: usize, alpha: &DistributionSpec) -> Self {
        Predicate::Histogram(
            (0..=n as u64)
                .map(|k| {
                    alpha
                        .rounding_bounds(k)
                        .into_iter()
                        .map(|(lo, hi)| (lo as u32, hi as u32))
                        .collect()
                })
                .collect(),
        )
    }

    #[inline]
    fn accepts(&self, hist: &[u32], size: u32) -> bool {
        match self {
            Predicate::Residue(r) => hist[*r as usize] == size,
            Predicate::Histogram(bounds) => hist
                .iter()
                .zip(&bounds[size as usize])
                .all(|(&c, &(lo, hi))| lo <= c && c <= hi),
        }
    }
}

/// Incremental state of one Gray-code walk (n ≤ 64).
struct Walker<'a> {
    rows: &'a [u64],
    q: u32,
    mask: u64,
    size: u32,
    /// `|N(v) ∩ S| mod q` for every vertex, member or not.
    res: Vec<u32>,
    /// Residue histogram over members of `S`.
    hist: Vec<u32>,
}

impl<'a> Walker<'a> {
    fn new(rows: &'a [u64], q: u32, mask: u64) -> Self {
        let res: Vec<u32> = rows.iter().map(|&row| (row & mask).count_ones() % q).collect();
        let mut hist = vec![0u32; q as usize];
        for v in BitIter(mask) {
            hist[res[v] as usize] += 1;
        }
        Self {
            rows,
            q,
            mask,
            size: mask.count_ones(),
            res,
            hist,
        }
    }

    #[inline]
    fn toggle(&mut self, x: usize) {
        let bit = 1u64 << x;
        let q = self.q;
        let adding = self.mask & bit == 0;
        if !adding {
            self.hist[self.res[x] as usize] -= 1;
            self.mask &= !bit;
            self.size -= 1;
        }
        let nbrs = self.rows[x];
        for u in BitIter(nbrs) {
            let old = self.res[u];
            let new = if adding {
                if old + 1 == q {
                    0
                } else {
                    old + 1
                }
            } else if old == 0 {
                q - 1
            } else {
                old - 1
            };
            self.res[u] = new;
            // Branch-free: membership is a coin flip for the predictor.
            let member = (self.mask >> u & 1) as u32;
            self.hist[old as usize] -= member;
            self.hist[new as usize] += member;
        }
        if adding {
            self.mask |= bit;
            self.size += 1;
            self.hist[self.res[x] as usize] += 1;
        }
    }
}

/// Calls `visit(mask, size, accepted)` on every nonempty subset of `[n]`,
/// slice by slice in parallel, and folds per-slice accumulators in slice
/// order.
fn scan<A, F, M>(g: &Graph, q: u32, pred: &Predicate, init: impl Fn() -> A + Sync, visit: F, merge: M) -> A
where
    A: Send,
    F: Fn(&mut A, u64, u32) + Sync,
    M: Fn(A, A) -> A,
{
    let n = g.n();
    let rows: Vec<u64> = (0..n).map(|i| g.row_word(i)).collect();
    let top = SLICE_BITS.min(n);
    let low = n - top;
    let parts: Vec<A> = (0u64..1 << top)
        .into_par_iter()
        .map(|prefix| {
            let mut acc = init();
            let mut w = Walker::new(&rows, q, prefix << low);
            let check = |w: &Walker, acc: &mut A| {
                if w.size > 0 && pred.accepts(&w.hist, w.size) {
                    visit(acc, w.mask, w.size);
                }
            };
            check(&w, &mut acc);
            for step in 1u64..(1u64 << low) {
                w.toggle(step.trailing_zeros() as usize);
                check(&w, &mut acc);
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one slice");
    it.fold(first, merge)
}

fn check_exact_cap(g: &Graph) -> Result<()> {
    if g.n() > EXACT_CAP {
        return capacity(format!(
            "exhaustive search needs n <= {EXACT_CAP}, got {}; use local search instead",
            g.n()
        ));
    }
    Ok(())
}

fn subsets_visited(n: usize) -> u64 {
    (1u64 << n) - 1
}

fn best_good(g: &Graph, q: u32, pred: &Predicate) -> SearchResult {
    type Best = Option<(u32, u64)>;
    let better = |a: Best, b: Best| -> Best {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some((sa, ma)), Some((sb, mb))) => {
                if sb > sa || (sb == sa && lex_less(mb, ma)) {
                    Some((sb, mb))
                } else {
                    Some((sa, ma))
                }
            }
        }
    };
    let best = scan(
        g,
        q,
        pred,
        || None,
        |acc: &mut Best, mask, size| *acc = better(*acc, Some((size, mask))),
        better,
    );
    let nodes = subsets_visited(g.n());
    match best {
        None => SearchResult::none(true, nodes),
        Some((size, mask)) => SearchResult {
            best_size: size as usize,
            witness: Some(VertexSet::from_mask(mask)),
            exact: true,
            nodes_explored: nodes,
        },
    }
}

/// `f(G, r, q)`: the largest good induced subgraph, with the
/// lexicographically least witness of that size.
pub fn exact_f(g: &Graph, mp: ModParams) -> Result<SearchResult> {
    check_exact_cap(g)?;
    Ok(best_good(g, mp.q(), &Predicate::Residue(mp.r())))
}

/// `f(G, α, q)`: the largest subset whose residue histogram matches `α`.
pub fn exact_f_alpha(g: &Graph, q: u32, alpha: &DistributionSpec) -> Result<SearchResult> {
    check_exact_cap(g)?;
    check_alpha(q, alpha)?;
    Ok(best_good(g, q, &Predicate::alpha(g.n(), alpha)))
}

fn check_alpha(q: u32, alpha: &DistributionSpec) -> Result<()> {
    if alpha.q() != q {
        return domain(format!("distribution has {} classes but q={q}", alpha.q()));
    }
    Ok(())
}

fn counts_by_size(g: &Graph, q: u32, pred: &Predicate) -> Vec<u64> {
    let n = g.n();
    scan(
        g,
        q,
        pred,
        || vec![0u64; n + 1],
        |acc: &mut Vec<u64>, _, size| acc[size as usize] += 1,
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )
}

/// Number of good subsets of each size `0..=n`; entry 0 is always 0.
pub fn count_good_by_size(g: &Graph, mp: ModParams) -> Result<Vec<u64>> {
    check_exact_cap(g)?;
    Ok(counts_by_size(g, mp.q(), &Predicate::Residue(mp.r())))
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k == 0 || k > g.n() {
        return domain(format!("need 1 <= k <= n = {}, got k = {k}", g.n()));
    }
    Ok(())
}

/// `X_k`: the number of good `k`-subsets.
pub fn count_good(g: &Graph, k: usize, mp: ModParams) -> Result<u64> {
    check_k(g, k)?;
    Ok(count_good_by_size(g, mp)?[k])
}

/// Number of `k`-subsets whose residue histogram matches `α`.
pub fn count_good_alpha(g: &Graph, k: usize, q: u32, alpha: &DistributionSpec) -> Result<u64> {
    check_exact_cap(g)?;
    check_alpha(q, alpha)?;
    check_k(g, k)?;
    Ok(counts_by_size(g, q, &Predicate::alpha(g.n(), alpha))[k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchParams {
    pub max_steps: u64,
    pub restarts: u32,
    pub seed: u64,
    /// Relative frequency of add, remove and swap moves.
    pub move_weights: [f64; 3],
    /// Steps without improving the restart's best cost before giving up on
    /// that restart.
    pub plateau_tolerance: u64,
}

impl Default for LocalSearchParams {
    fn default() -> Self {
        Self {
            max_steps: 20_000,
            restarts: 8,
            seed: 0,
            move_weights: [1.0, 1.0, 16.0],
            plateau_tolerance: 8_000,
        }
    }
}

impl LocalSearchParams {
    fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return domain("max_steps must be at least 1");
        }
        if self.restarts == 0 {
            return domain("restarts must be at least 1");
        }
        if self.move_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.move_weights.iter().sum::<f64>() <= 0.0
        {
            return domain("move weights must be nonnegative with a positive sum");
        }
        Ok(())
    }
}

/// Incremental state for the local search; works for any `n`.
struct Tabu<'a> {
    adj: &'a [Vec<u32>],
    q: u32,
    r: u32,
    in_set: Vec<bool>,
    members: Vec<usize>,
    /// Position of each member in `members`, or `usize::MAX`.
    pos: Vec<usize>,
    /// `|N(v) ∩ S|` for every vertex.
    deg: Vec<u32>,
    bad: i64,
}

impl<'a> Tabu<'a> {
    fn new(adj: &'a [Vec<u32>], q: u32, r: u32) -> Self {
        let n = adj.len();
        Self {
            adj,
            q,
            r,
            in_set: vec![false; n],
            members: Vec::new(),
            pos: vec![usize::MAX; n],
            deg: vec![0; n],
            bad: 0,
        }
    }

    #[inline]
    fn off(&self, d: u32) -> i64 {
        (d % self.q != self.r) as i64
    }

    fn add(&mut self, v: usize) {
        for &u in &self.adj[v] {
            let u = u as usize;
            if self.in_set[u] {
                self.bad += self.off(self.deg[u] + 1) - self.off(self.deg[u]);
            }
            self.deg[u] += 1;
        }
        self.in_set[v] = true;
        self.pos[v] = self.members.len();
        self.members.push(v);
        self.bad += self.off(self.deg[v]);
    }

    fn remove(&mut self, v: usize) {
        self.bad -= self.off(self.deg[v]);
        self.in_set[v] = false;
        let p = self.pos[v];
        self.members.swap_remove(p);
        if p < self.members.len() {
            self.pos[self.members[p]] = p;
        }
        self.pos[v] = usize::MAX;
        for &u in &self.adj[v] {
            let u = u as usize;
            if self.in_set[u] {
                self.bad += self.off(self.deg[u] - 1) - self.off(self.deg[u]);
            }
            self.deg[u] -= 1;
        }
    }

    fn delta_add(&self, v: usize) -> i64 {
        let mut d = self.off(self.deg[v]);
        for &u in &self.adj[v] {
            let u = u as usize;
            if self.in_set[u] {
                d += self.off(self.deg[u] + 1) - self.off(self.deg[u]);
            }
        }
        d
    }

    fn delta_remove(&self, v: usize) -> i64 {
        let mut d = -self.off(self.deg[v]);
        for &u in &self.adj[v] {
            let u = u as usize;
            if self.in_set[u] {
                d += self.off(self.deg[u] - 1) - self.off(self.deg[u]);
            }
        }
        d
    }

    fn set(&self) -> VertexSet {
        VertexSet::from_vertices(self.members.iter().copied())
    }
}

#[derive(Clone, Copy)]
enum Move {
    Add(usize),
    Remove(usize),
    Swap(usize, usize),
}

/// Best candidate with uniformly random tie-breaking.
struct Pick {
    cost: i64,
    mv: Option<Move>,
    ties: u32,
}

impl Pick {
    fn new() -> Self {
        Self {
            cost: i64::MAX,
            mv: None,
            ties: 0,
        }
    }

    fn offer(&mut self, cost: i64, mv: Move, rng: &mut SplitMix64) {
        if cost < self.cost {
            self.cost = cost;
            self.mv = Some(mv);
            self.ties = 1;
        } else if cost == self.cost {
            self.ties += 1;
            if rng.random_range(0..self.ties) == 0 {
                self.mv = Some(mv);
            }
        }
    }
}

fn better_witness(a: &Option<VertexSet>, b: &VertexSet) -> bool {
    match a {
        None => true,
        Some(a) => b.len() > a.len() || (b.len() == a.len() && b.to_vec() < a.to_vec()),
    }
}

fn run_restart(adj: &[Vec<u32>], mp: ModParams, k_target: usize, params: &LocalSearchParams, seed: u64) -> (Option<VertexSet>, u64) {
    let n = adj.len();
    let mut rng = SplitMix64::new(seed);
    let mut st = Tabu::new(adj, mp.q(), mp.r());
    let init = k_target.clamp(1, n);
    for v in sample(&mut rng, n, init).into_iter() {
        st.add(v);
    }
    let target = k_target as i64;
    let cost = |bad: i64, size: usize| bad + (target - size as i64).abs();
    let mut best_cost = cost(st.bad, st.members.len());
    let mut witness: Option<VertexSet> = None;
    let mut tabu_until = vec![0u64; n];
    let tenure = (n as u64 / 8).max(3);
    let mut since_improved = 0u64;
    let total_w: f64 = params.move_weights.iter().sum();
    let mut steps = 0u64;

    let record = |st: &Tabu, witness: &mut Option<VertexSet>| {
        if st.bad == 0 && !st.members.is_empty() {
            let s = st.set();
            if better_witness(witness, &s) {
                *witness = Some(s);
            }
        }
    };
    record(&st, &mut witness);

    while steps < params.max_steps {
        if witness.as_ref().is_some_and(|w| w.len() >= k_target.max(1)) {
            break;
        }
        if since_improved > params.plateau_tolerance {
            break;
        }
        steps += 1;
        let size = st.members.len();
        let allowed = |v: usize, cand: i64| tabu_until[v] < steps || cand < best_cost;

        // Pick a move class by weight; fall back to the others if it has no move.
        let roll = rng.random::<f64>() * total_w;
        let first = if roll < params.move_weights[0] {
            0
        } else if roll < params.move_weights[0] + params.move_weights[1] {
            1
        } else {
            2
        };
        let mut pick = Pick::new();
        for class in [first, (first + 1) % 3, (first + 2) % 3] {
            if params.move_weights[class] == 0.0 {
                continue;
            }
            match class {
                0 if size < n => {
                    for v in (0..n).filter(|&v| !st.in_set[v]) {
                        let c = cost(st.bad + st.delta_add(v), size + 1);
                        if allowed(v, c) {
                            pick.offer(c, Move::Add(v), &mut rng);
                        }
                    }
                }
                1 if size > 1 => {
                    for &v in &st.members {
                        let c = cost(st.bad + st.delta_remove(v), size - 1);
                        if allowed(v, c) {
                            pick.offer(c, Move::Remove(v), &mut rng);
                        }
                    }
                }
                2 if size < n => {
                    let members = st.members.clone();
                    for a in members {
                        st.remove(a);
                        for b in (0..n).filter(|&b| b != a && !st.in_set[b]) {
                            let c = cost(st.bad + st.delta_add(b), size);
                            if allowed(a, c) && allowed(b, c) {
                                pick.offer(c, Move::Swap(a, b), &mut rng);
                            }
                        }
                        st.add(a);
                    }
                }
                _ => {}
            }
            if pick.mv.is_some() {
                break;
            }
        }
        let Some(mv) = pick.mv else { break };
        let stamp = steps + tenure + rng.random_range(0..tenure);
        match mv {
            Move::Add(v) => {
                st.add(v);
                tabu_until[v] = stamp;
            }
            Move::Remove(v) => {
                st.remove(v);
                tabu_until[v] = stamp;
            }
            Move::Swap(a, b) => {
                st.remove(a);
                st.add(b);
                tabu_until[a] = stamp;
                tabu_until[b] = stamp;
            }
        }
        let c = cost(st.bad, st.members.len());
        if c < best_cost {
            best_cost = c;
            since_improved = 0;
        } else {
            since_improved += 1;
        }
        record(&st, &mut witness);
    }
    (witness, steps)
}

/// Seeded multi-restart tabu search for a good set of size `k_target`.
///
/// The cost of a set is its number of bad members plus its distance from
/// `k_target`. Each restart stops once it holds a good set of size at least
/// `k_target`; the largest good set over all restarts is returned (ties to
/// the lexicographically least), after re-verification.
pub fn local_search_f(g: &Graph, mp: ModParams, k_target: usize, params: &LocalSearchParams) -> Result<SearchResult> {
    params.validate()?;
    let n = g.n();
    if k_target > n {
        return domain(format!("k_target = {k_target} exceeds n = {n}"));
    }
    if n == 0 {
        return Ok(SearchResult::none(false, 0));
    }
    let adj: Vec<Vec<u32>> = (0..n)
        .map(|v| (0..n).filter(|&u| g.has_edge(v, u)).map(|u| u as u32).collect())
        .collect();
    let runs: Vec<(Option<VertexSet>, u64)> = (0..params.restarts as u64)
        .into_par_iter()
        .map(|i| run_restart(&adj, mp, k_target, params, derive_seed(params.seed, i)))
        .collect();
    let nodes = runs.iter().map(|r| r.1).sum();
    let mut best: Option<VertexSet> = None;
    for (w, _) in runs {
        if let Some(w) = w {
            if better_witness(&best, &w) {
                best = Some(w);
            }
        }
    }
    match best {
        Some(w) if is_good(g, &w, mp)? => Ok(SearchResult {
            best_size: w.len(),
            witness: Some(w),
            exact: false,
            nodes_explored: nodes,
        }),
        _ => Ok(SearchResult::none(false, nodes)),
    }
}

/// Re-checks a result against its predicate without any incremental state.
pub fn verify_result(g: &Graph, res: &SearchResult, mp: ModParams) -> Result<bool> {
    match &res.witness {
        None => Ok(res.best_size == 0),
        Some(w) => Ok(w.len() == res.best_size && is_good(g, w, mp)?),
    }
}

/// As [`verify_result`] for the histogram predicate.
pub fn verify_result_alpha(g: &Graph, res: &SearchResult, q: u32, alpha: &DistributionSpec) -> Result<bool> {
    match &res.witness {
        None => Ok(res.best_size == 0),
        Some(w) => Ok(w.len() == res.best_size && is_good_alpha(g, w, q, alpha)?),
    }
}
