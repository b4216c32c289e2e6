//! Bitset-backed simple graphs on up to 64 labeled vertices.
//!
//! A graph stores one 64-bit neighbor mask per vertex. All operations are
//! pure: graphs are immutable values after construction and safe to share
//! across threads.

use std::fmt;

use thiserror::Error;

use crate::prob::Probability;
use crate::rng::SplitMix64;

/// Hard vertex capacity imposed by the one-word-per-vertex representation.
pub const MAX_VERTICES: usize = 64;

/// Largest vertex count encodable with a single-byte graph6 size prefix.
pub const MAX_GRAPH6_VERTICES: usize = 62;

/// Default cap on pattern size for [`Graph::contains_subgraph`].
pub const DEFAULT_PATTERN_CAP: usize = 8;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex count {n} exceeds the capacity of {MAX_VERTICES}")]
    CapacityExceeded { n: usize },
    #[error("self-loop at vertex {v} is not allowed")]
    SelfLoop { v: usize },
    #[error("vertex {v} out of range for a graph on {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("vertex counts differ: {left} vs {right}")]
    MismatchedVertexCount { left: usize, right: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("pattern has {len} vertices, above the cap of {cap}")]
    PatternTooLarge { len: usize, cap: usize },
    #[error("sequence of length {len} is not a permutation of 0..{n}")]
    NotAPermutation { len: usize, n: usize },
    #[error("graph6 string is malformed: {0}")]
    Graph6Malformed(String),
    #[error("graph6 size {n} unsupported (single-byte sizes cover n <= {MAX_GRAPH6_VERTICES})")]
    Graph6UnsupportedSize { n: usize },
}

/// Set of vertices inside an ambient graph on `n` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VertexSet {
    mask: u64,
    n: u8,
}

impl VertexSet {
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::CapacityExceeded { n });
        }
        Ok(Self {
            mask: 0,
            n: n as u8,
        })
    }

    pub fn full(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::CapacityExceeded { n });
        }
        Ok(Self {
            mask: low_bits(n),
            n: n as u8,
        })
    }

    /// Builds a set from explicit members.
    pub fn from_members(n: usize, members: &[usize]) -> Result<Self, GraphError> {
        let mut set = Self::empty(n)?;
        for &v in members {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { v, n });
            }
            set.mask |= 1 << v;
        }
        Ok(set)
    }

    pub(crate) fn from_mask(mask: u64, n: usize) -> Self {
        debug_assert!(n <= MAX_VERTICES);
        debug_assert_eq!(mask & !low_bits(n), 0);
        Self { mask, n: n as u8 }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Ambient vertex count.
    pub fn ambient(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n as usize && self.mask & (1 << v) != 0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter(self.mask)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }
}

/// Undirected simple graph on `n <= 64` labeled vertices.
///
/// Invariants: neighbor masks are symmetric, loop-free, and contain no bits
/// at or above index `n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: u8,
    adj: [u64; MAX_VERTICES],
}

#[inline]
pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `n * (n - 1) / 2` as u64.
#[inline]
pub fn pair_count(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::CapacityExceeded { n });
        }
        Ok(Self {
            n: n as u8,
            adj: [0; MAX_VERTICES],
        })
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut g = Self::empty(n)?;
        let all = low_bits(n);
        for v in 0..n {
            g.adj[v] = all & !(1 << v);
        }
        Ok(g)
    }

    /// Builds a graph from an edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            g = g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n as usize
    }

    /// Returns a copy with edge `{u, v}` present. Idempotent.
    pub fn add_edge(&self, u: usize, v: usize) -> Result<Self, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop { v });
        }
        let mut g = self.clone();
        g.adj[u] |= 1 << v;
        g.adj[v] |= 1 << u;
        Ok(g)
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n as usize {
            return Err(GraphError::VertexOutOfRange {
                v,
                n: self.n as usize,
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn set_edge_unchecked(&mut self, u: usize, v: usize, present: bool) {
        debug_assert!(u != v && u < self.n as usize && v < self.n as usize);
        if present {
            self.adj[u] |= 1 << v;
            self.adj[v] |= 1 << u;
        } else {
            self.adj[u] &= !(1 << v);
            self.adj[v] &= !(1 << u);
        }
    }

    #[inline]
    pub(crate) fn flip_edge_unchecked(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n as usize && v < self.n as usize);
        self.adj[u] ^= 1 << v;
        self.adj[v] ^= 1 << u;
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n as usize && v < self.n as usize && self.adj[u] & (1 << v) != 0
    }

    /// Number of edges.
    pub fn edge_count(&self) -> u32 {
        let mut total = 0u32;
        for v in 0..self.n as usize {
            total += self.adj[v].count_ones();
        }
        total / 2
    }

    /// Number of edges with both endpoints inside `mask`.
    #[inline]
    pub(crate) fn edges_within_mask(&self, mask: u64) -> u32 {
        let mut total = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            // Count only neighbors below v to avoid double counting.
            total += (self.adj[v] & mask & ((1u64 << v) - 1)).count_ones();
        }
        total
    }

    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        debug_assert!(v < self.n as usize);
        self.adj[v].count_ones()
    }

    /// Edge-wise intersection. Both graphs must have the same vertex count.
    pub fn intersect(&self, other: &Graph) -> Result<Graph, GraphError> {
        if self.n != other.n {
            return Err(GraphError::MismatchedVertexCount {
                left: self.n as usize,
                right: other.n as usize,
            });
        }
        let mut g = Graph::empty(self.n as usize).expect("capacity already checked");
        for v in 0..self.n as usize {
            g.adj[v] = self.adj[v] & other.adj[v];
        }
        Ok(g)
    }

    /// Edge-wise complement (loop-free).
    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n as usize).expect("capacity already checked");
        let all = low_bits(self.n as usize);
        for v in 0..self.n as usize {
            g.adj[v] = all & !self.adj[v] & !(1 << v);
        }
        g
    }

    /// Subgraph induced on `set`, relabeled order-preservingly: output
    /// vertex `i` corresponds to the `i`-th smallest member of `set`.
    pub fn induced_subgraph(&self, set: VertexSet) -> Result<Graph, GraphError> {
        if set.ambient() != self.n as usize {
            return Err(GraphError::MismatchedVertexCount {
                left: self.n as usize,
                right: set.ambient(),
            });
        }
        let members = set.to_vec();
        let mut g = Graph::empty(members.len()).expect("subset of a valid graph");
        for (i, &u) in members.iter().enumerate() {
            for (j, &v) in members.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.adj[i] |= 1 << j;
                    g.adj[j] |= 1 << i;
                }
            }
        }
        Ok(g)
    }

    /// A vertex of maximum degree; ties broken by lowest index.
    pub fn max_degree_vertex(&self) -> Result<usize, GraphError> {
        if self.n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut best = 0usize;
        let mut best_deg = self.adj[0].count_ones();
        for v in 1..self.n as usize {
            let d = self.adj[v].count_ones();
            if d > best_deg {
                best = v;
                best_deg = d;
            }
        }
        Ok(best)
    }

    /// Neighbors of `v` as a vertex set (never contains `v`).
    pub fn neighbors(&self, v: usize) -> Result<VertexSet, GraphError> {
        self.check_vertex(v)?;
        Ok(VertexSet::from_mask(self.adj[v], self.n as usize))
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::from_mask(low_bits(self.n as usize), self.n as usize)
    }

    /// True iff some `k` vertices are pairwise adjacent.
    pub fn contains_clique(&self, k: usize) -> bool {
        self.find_clique(k).is_some()
    }

    /// Finds a `k`-clique if one exists. Deterministic: the search branches
    /// on the lowest-index candidate first and returns the first clique it
    /// completes, so for a fixed graph the result never varies.
    pub fn find_clique(&self, k: usize) -> Option<VertexSet> {
        let n = self.n as usize;
        if k == 0 {
            return Some(VertexSet::from_mask(0, n));
        }
        if k > n {
            return None;
        }
        let mut found = 0u64;
        if self.clique_search(0, low_bits(n), k, &mut found) {
            Some(VertexSet::from_mask(found, n))
        } else {
            None
        }
    }

    /// Branch-and-bound over neighbor masks: extend the partial clique in
    /// `taken` with candidates from `allowed`, pruning when even taking all
    /// candidates cannot reach size `k`.
    fn clique_search(&self, taken: u64, allowed: u64, k: usize, out: &mut u64) -> bool {
        let have = taken.count_ones() as usize;
        if have >= k {
            *out = taken;
            return true;
        }
        let mut candidates = allowed;
        while candidates != 0 {
            // Even taking every remaining candidate cannot reach k.
            if have + (candidates.count_ones() as usize) < k {
                return false;
            }
            let v = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            // Only candidates after v that are adjacent to v can extend.
            let next_allowed = candidates & self.adj[v];
            if self.clique_search(taken | (1 << v), next_allowed, k, out) {
                return true;
            }
        }
        false
    }

    /// True iff `pattern` embeds into this graph via some injective vertex
    /// map sending pattern edges to edges (not necessarily induced).
    pub fn contains_subgraph(&self, pattern: &Graph) -> Result<bool, GraphError> {
        self.contains_subgraph_with_cap(pattern, DEFAULT_PATTERN_CAP)
    }

    pub fn contains_subgraph_with_cap(
        &self,
        pattern: &Graph,
        cap: usize,
    ) -> Result<bool, GraphError> {
        let h = pattern.n as usize;
        if h > cap {
            return Err(GraphError::PatternTooLarge { len: h, cap });
        }
        if h > self.n as usize {
            return Ok(false);
        }
        // Branch on pattern vertices in descending degree order; high-degree
        // vertices constrain the embedding most.
        let mut order: Vec<usize> = (0..h).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(pattern.adj[v].count_ones()));
        let mut assignment = vec![usize::MAX; h];
        Ok(self.embed(pattern, &order, 0, &mut assignment, 0))
    }

    fn embed(
        &self,
        pattern: &Graph,
        order: &[usize],
        depth: usize,
        assignment: &mut [usize],
        used: u64,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let hv = order[depth];
        'candidates: for gv in 0..self.n as usize {
            if used & (1 << gv) != 0 {
                continue;
            }
            // Every already-placed pattern neighbor must map to a neighbor of gv.
            for &placed in &order[..depth] {
                if pattern.has_edge(hv, placed) && !self.has_edge(gv, assignment[placed]) {
                    continue 'candidates;
                }
            }
            assignment[hv] = gv;
            if self.embed(pattern, order, depth + 1, assignment, used | (1 << gv)) {
                return true;
            }
            assignment[hv] = usize::MAX;
        }
        false
    }

    /// Samples G(n, p): each unordered pair `{u, v}` is included
    /// independently with probability exactly `p`.
    ///
    /// Pairs are decided in lexicographic order ((0,1), (0,2), ..,
    /// (n-2,n-1)) from a [`SplitMix64`] stream seeded with `seed`, one exact
    /// Bernoulli trial per pair, so identical `(n, p, seed)` produce an
    /// identical graph on every platform.
    pub fn sample_gnp(n: usize, p: Probability, seed: u64) -> Result<Graph, GraphError> {
        let mut g = Graph::empty(n)?;
        let mut rng = SplitMix64::new(seed);
        let (num, den) = (p.numer(), p.denom());
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.bernoulli(num, den) {
                    g.adj[u] |= 1 << v;
                    g.adj[v] |= 1 << u;
                }
            }
        }
        Ok(g)
    }

    /// Relabels vertices: edge `{perm[u], perm[v]}` is present in the result
    /// iff `{u, v}` is present here. `perm` must be a bijection on `0..n`.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        let n = self.n as usize;
        if perm.len() != n {
            return Err(GraphError::NotAPermutation { len: perm.len(), n });
        }
        let mut seen = 0u64;
        for &img in perm {
            if img >= n || seen & (1 << img) != 0 {
                return Err(GraphError::NotAPermutation { len: perm.len(), n });
            }
            seen |= 1 << img;
        }
        let mut g = Graph::empty(n).expect("same vertex count");
        for u in 0..n {
            for v in (u + 1)..n {
                if self.has_edge(u, v) {
                    g.adj[perm[u]] |= 1 << perm[v];
                    g.adj[perm[v]] |= 1 << perm[u];
                }
            }
        }
        Ok(g)
    }

    /// Encodes to graph6 (single-byte size prefix, so `n <= 62`).
    pub fn to_graph6(&self) -> Result<String, GraphError> {
        let n = self.n as usize;
        if n > MAX_GRAPH6_VERTICES {
            return Err(GraphError::Graph6UnsupportedSize { n });
        }
        let mut out = String::new();
        out.push((n as u8 + 63) as char);
        // Upper triangle in column order: for each v, pairs (0,v)..(v-1,v).
        let mut chunk = 0u8;
        let mut bits = 0u8;
        for v in 1..n {
            for u in 0..v {
                chunk <<= 1;
                if self.has_edge(u, v) {
                    chunk |= 1;
                }
                bits += 1;
                if bits == 6 {
                    out.push((chunk + 63) as char);
                    chunk = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            chunk <<= 6 - bits;
            out.push((chunk + 63) as char);
        }
        Ok(out)
    }

    /// Decodes a graph6 string produced by [`Graph::to_graph6`] (or any
    /// standard encoder using a single-byte size).
    pub fn parse_graph6(text: &str) -> Result<Graph, GraphError> {
        let bytes = text.trim_end_matches(['\n', '\r']).as_bytes();
        if bytes.is_empty() {
            return Err(GraphError::Graph6Malformed("empty string".into()));
        }
        if bytes[0] == 126 {
            // Multi-byte size prefix (n > 62): out of scope.
            return Err(GraphError::Graph6UnsupportedSize { n: 63 });
        }
        if !(63..=125).contains(&bytes[0]) {
            return Err(GraphError::Graph6Malformed(format!(
                "invalid size byte {}",
                bytes[0]
            )));
        }
        let n = (bytes[0] - 63) as usize;
        let pair_bits = n * n.saturating_sub(1) / 2;
        let body_len = pair_bits.div_ceil(6);
        if bytes.len() != 1 + body_len {
            return Err(GraphError::Graph6Malformed(format!(
                "expected {} data bytes for n={n}, got {}",
                body_len,
                bytes.len() - 1
            )));
        }
        let mut g = Graph::empty(n)?;
        let mut bit_index = 0usize;
        'outer: for v in 1..n {
            for u in 0..v {
                let byte = bytes[1 + bit_index / 6];
                if !(63..=126).contains(&byte) {
                    return Err(GraphError::Graph6Malformed(format!(
                        "invalid data byte {byte}"
                    )));
                }
                let chunk = byte - 63;
                if chunk & (1 << (5 - (bit_index % 6))) != 0 {
                    g.adj[u] |= 1 << v;
                    g.adj[v] |= 1 << u;
                }
                bit_index += 1;
                if bit_index >= pair_bits {
                    break 'outer;
                }
            }
        }
        // Padding bits beyond the last pair must be zero.
        if !pair_bits.is_multiple_of(6) {
            let last = bytes[bytes.len() - 1] - 63;
            let pad = 6 - (pair_bits % 6);
            if last & ((1 << pad) - 1) != 0 {
                return Err(GraphError::Graph6Malformed("nonzero padding bits".into()));
            }
        }
        Ok(g)
    }

    /// Sorted degree sequence, handy for isomorphism-invariance checks.
    pub fn degree_sequence(&self) -> Vec<u32> {
        let mut degrees: Vec<u32> = (0..self.n as usize).map(|v| self.degree(v)).collect();
        degrees.sort_unstable();
        degrees
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        let mut first = true;
        for u in 0..self.n as usize {
            for v in (u + 1)..self.n as usize {
                if self.has_edge(u, v) {
                    if !first {
                        write!(f, " ")?;
                    }
                    write!(f, "{u}-{v}")?;
                    first = false;
                }
            }
        }
        write!(f, "])")
    }
}

/// Lexicographic edge slots for a graph on `n` vertices: index `i` holds the
/// `i`-th pair in (0,1), (0,2), .., (0,n-1), (1,2), .. order.
pub(crate) fn edge_slots(n: usize) -> Vec<(usize, usize)> {
    let mut slots = Vec::with_capacity(pair_count(n as u64) as usize);
    for u in 0..n {
        for v in (u + 1)..n {
            slots.push((u, v));
        }
    }
    slots
}

/// Visits every graph on `n` vertices exactly once in Gray-code order over
/// edge subsets, so consecutive graphs differ by one edge. The callback gets
/// the graph and its current edge count. Caller is responsible for keeping
/// `pair_count(n)` at an enumerable size.
pub(crate) fn for_each_graph_gray(n: usize, mut f: impl FnMut(&Graph, u32)) {
    let slots = edge_slots(n);
    let bits = slots.len();
    debug_assert!(bits < 63, "edge space too large to enumerate");
    let mut g = Graph::empty(n).expect("validated by caller");
    let mut edges = 0u32;
    f(&g, edges);
    for i in 1u64..(1u64 << bits) {
        let flip = i.trailing_zeros() as usize;
        let (u, v) = slots[flip];
        let adding = !g.has_edge(u, v);
        g.flip_edge_unchecked(u, v);
        edges = if adding { edges + 1 } else { edges - 1 };
        f(&g, edges);
    }
}
