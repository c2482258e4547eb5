//! Bit-packed undirected graphs, G(n, 1/2) sampling and degree-residue kernels.
//!
//! Row `i` of a [`Graph`] is the neighbourhood of vertex `i` stored as a
//! bitset. Graphs on at most 64 vertices fit one word per row; the exact
//! enumeration paths rely on that and read rows through [`Graph::row_word`].

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::rng::stream_word;
use crate::thresholds::DistributionSpec;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Undirected simple graph with bit-packed adjacency rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        let stride = words_for(n);
        Self {
            n,
            stride,
            bits: vec![0; n * stride],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j);
            }
        }
        g
    }

    /// Builds a graph from an edge list. Self-loops and out-of-range endpoints
    /// are rejected; repeated edges are harmless.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return domain(format!("edge ({a},{b}) out of range for n={n}"));
            }
            if a == b {
                return domain(format!("self-loop at vertex {a}"));
            }
            g.set_edge(a, b);
        }
        Ok(g)
    }

    /// Graph on `n <= 64` vertices from one adjacency word per row.
    pub fn from_row_words(rows: &[u64]) -> Result<Self> {
        if rows.len() > 64 {
            return domain(format!("one word per row holds at most 64 vertices, got {}", rows.len()));
        }
        let g = Self {
            n: rows.len(),
            stride: words_for(rows.len()),
            bits: rows.to_vec(),
        };
        g.check_invariants().map_err(|e| Error::InputDomain(e.to_string()))?;
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    /// Row `i` as a single word; only valid for `n <= 64`.
    #[inline]
    pub fn row_word(&self, i: usize) -> u64 {
        debug_assert!(self.n <= 64);
        self.bits[i]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        self.bits[i * self.stride + j / 64] |= 1 << (j % 64);
        self.bits[j * self.stride + i / 64] |= 1 << (i % 64);
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// `|N(v) ∩ S|` by popcount of row-AND-mask.
    #[inline]
    pub fn degree_in(&self, v: usize, set: &VertexSet) -> usize {
        self.row(v)
            .iter()
            .zip(set.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    /// Symmetry and zero-diagonal check over every bit (including padding).
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return Err(Error::Internal(format!("self-loop at vertex {i}")));
            }
            let row = self.row(i);
            if let Some(&last) = row.last() {
                let used = self.n % 64;
                if used != 0 && last >> used != 0 {
                    return Err(Error::Internal(format!("row {i} has bits beyond n")));
                }
            }
            for j in 0..i {
                if self.has_edge(i, j) != self.has_edge(j, i) {
                    return Err(Error::Internal(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    /// Induced subgraph on `set`, relabelled to `0..|set|` in ascending order.
    pub fn induced(&self, set: &VertexSet) -> Graph {
        let verts: Vec<usize> = set.iter().collect();
        let mut g = Graph::empty(verts.len());
        for (a, &u) in verts.iter().enumerate() {
            for (b, &w) in verts.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, w) {
                    g.set_edge(a, b);
                }
            }
        }
        g
    }

    /// Text form: `n`, then `n` lines of `n` characters in `{0,1}`.
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity((self.n + 1) * (self.n + 1) + 8);
        out.push_str(&self.n.to_string());
        out.push('\n');
        for i in 0..self.n {
            for j in 0..self.n {
                out.push(if self.has_edge(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form produced by [`Graph::encode`]. Errors name the
    /// 1-based line at fault.
    pub fn decode(text: &str) -> Result<Graph> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        if !text.ends_with('\n') {
            let line = text.lines().count().max(1);
            return Err(perr(line, "missing trailing newline".into()));
        }
        let mut lines = text[..text.len() - 1].split('\n');
        let header = lines.next().unwrap_or("");
        let n: usize = header
            .trim_end_matches('\r')
            .parse()
            .map_err(|_| perr(1, format!("malformed header {header:?}, expected vertex count")))?;
        let mut g = Graph::empty(n);
        for i in 0..n {
            let line_no = i + 2;
            let row = lines
                .next()
                .ok_or_else(|| perr(line_no, format!("missing row {i}")))?
                .trim_end_matches('\r');
            if row.len() != n {
                return Err(perr(line_no, format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, c) in row.bytes().enumerate() {
                match c {
                    b'0' => {}
                    b'1' if i == j => return Err(perr(line_no, format!("self-loop at ({i},{i})"))),
                    b'1' => g.bits[i * g.stride + j / 64] |= 1 << (j % 64),
                    _ => return Err(perr(line_no, format!("invalid character {:?} at ({i},{j})", c as char))),
                }
            }
        }
        if let Some(extra) = lines.next() {
            return Err(perr(n + 2, format!("unexpected trailing line {extra:?}")));
        }
        for i in 0..n {
            for j in 0..i {
                if g.has_edge(i, j) != g.has_edge(j, i) {
                    return Err(perr(i + 2, format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(g)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl std::str::FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Graph::decode(s)
    }
}

/// Samples G(n, 1/2). Pair `(i, j)`, `i < j`, taken in row-major order, reads
/// one bit of the counter-based stream keyed by `seed`.
pub fn sample_gnp(n: usize, seed: u64) -> Graph {
    let mut g = Graph::empty(n);
    let mut pair = 0u64;
    let mut word = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if pair.is_multiple_of(64) {
                word = stream_word(seed, pair / 64);
            }
            if (word >> (pair % 64)) & 1 == 1 {
                g.set_edge(i, j);
            }
            pair += 1;
        }
    }
    g
}

/// A set of vertices stored as a bitmask. Trailing zero words are trimmed so
/// equal sets compare equal regardless of how they were built.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut s = Self { words: vec![mask] };
        s.trim();
        s
    }

    pub fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(n)];
        if !n.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        Self { words }
    }

    pub fn from_vertices<I: IntoIterator<Item = usize>>(verts: I) -> Self {
        let mut s = Self::new();
        for v in verts {
            s.insert(v);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, v: usize) {
        let w = v / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        if let Some(word) = self.words.get_mut(v / 64) {
            *word &= !(1 << (v % 64));
            self.trim();
        }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words.get(v / 64).is_some_and(|w| (w >> (v % 64)) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The set as one word, when every member is below 64.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn max_vertex(&self) -> Option<usize> {
        let last = self.words.len().checked_sub(1)?;
        Some(last * 64 + 63 - self.words[last].leading_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| BitIter(w).map(move |b| wi * 64 + b))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        match self.max_vertex() {
            Some(v) if v >= n => domain(format!("vertex {v} out of range for n={n}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_vertices(iter)
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Vec::<usize>::deserialize(d)?.into_iter().collect())
    }
}

/// Iterates the set bit positions of a word, lowest first.
#[derive(Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Sequence over `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueVector {
    q: u32,
    entries: Vec<u32>,
}

impl ResidueVector {
    pub fn new(q: u32, entries: Vec<u32>) -> Result<Self> {
        if q < 2 {
            return domain(format!("modulus q={q} must be at least 2"));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= q) {
            return domain(format!("entry {bad} is not a residue modulo {q}"));
        }
        Ok(Self { q, entries })
    }

    /// `r·1_len`.
    pub fn constant(q: u32, r: u32, len: usize) -> Result<Self> {
        Self::new(q, vec![r; len])
    }

    /// Reduces arbitrary integers modulo `q`.
    pub fn reduced(q: u32, values: &[i64]) -> Result<Self> {
        if q < 2 {
            return domain(format!("modulus q={q} must be at least 2"));
        }
        Ok(Self {
            q,
            entries: values.iter().map(|v| v.rem_euclid(q as i64) as u32).collect(),
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the entries, reduced modulo `q`.
    pub fn sum_mod(&self) -> u32 {
        (self.entries.iter().map(|&e| e as u64).sum::<u64>() % self.q as u64) as u32
    }

    /// Histogram `(c_0, …, c_{q-1})` of the entries.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.q as usize];
        for &e in &self.entries {
            h[e as usize] += 1;
        }
        h
    }
}

/// Modulus and target residue of the degree condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModParams {
    q: u32,
    r: u32,
}

impl ModParams {
    pub fn new(r: u32, q: u32) -> Result<Self> {
        if q < 2 {
            return domain(format!("modulus q={q} must be at least 2"));
        }
        if r >= q {
            return domain(format!("residue r={r} must be below q={q}"));
        }
        Ok(Self { q, r })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }
}

/// Degrees of `G[S]` modulo `q`, one entry per member of `S` in ascending
/// vertex order.
pub fn degrees_mod(g: &Graph, set: &VertexSet, q: u32) -> Result<ResidueVector> {
    set.check_within(g.n())?;
    if q < 2 {
        return domain(format!("modulus q={q} must be at least 2"));
    }
    let entries = set.iter().map(|v| (g.degree_in(v, set) % q as usize) as u32).collect();
    Ok(ResidueVector { q, entries })
}

/// Whether `G[S]` is nonempty with every degree congruent to `r` mod `q`.
pub fn is_good(g: &Graph, set: &VertexSet, mp: ModParams) -> Result<bool> {
    if set.is_empty() {
        return domain("is_good needs a nonempty vertex set");
    }
    let degs = degrees_mod(g, set, mp.q())?;
    Ok(degs.entries().iter().all(|&d| d == mp.r()))
}

/// Whether the residue histogram of `G[S]` matches the rounded distribution:
/// `c_i ∈ {⌊α_i k⌋, ⌈α_i k⌉}` for every `i`, with `k = |S|`.
pub fn is_good_alpha(g: &Graph, set: &VertexSet, q: u32, alpha: &DistributionSpec) -> Result<bool> {
    if set.is_empty() {
        return domain("is_good_alpha needs a nonempty vertex set");
    }
    if alpha.q() != q {
        return domain(format!("distribution has {} classes but q={q}", alpha.q()));
    }
    let hist = degrees_mod(g, set, q)?.histogram();
    let bounds = alpha.rounding_bounds(set.len() as u64);
    Ok(hist
        .iter()
        .zip(bounds.iter())
        .all(|(&c, &(lo, hi))| (lo..=hi).contains(&(c as u64))))
}
