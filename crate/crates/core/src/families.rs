//! Membership oracles for the graph families under study.
//!
//! Four kinds of family over the graphs on `n` labeled vertices:
//!
//! * **Majority**: graphs with strictly more than half of all possible
//!   edges. Any two members share an edge, so the family is
//!   edge-intersecting. Empty for `n <= 1` (strictly more than half of zero
//!   possible edges is unsatisfiable).
//! * **Recursive** (parameters `t >= 2`, `p > 1/2`): the level-2 family is
//!   Majority; a graph is in the level-`(t+1)` family iff it has at least
//!   `((p + 1/2) / 2) * C(n,2)` edges and every induced subgraph on at least
//!   `(p - 1/2)(n - 1)` vertices lies in the level-`t` family. Members
//!   pairwise intersect in a `K_t`. All threshold comparisons are exact
//!   rational arithmetic; `at least` is non-strict.
//! * **TuranThreshold** (parameter `t >= 1`): graphs whose edge count `e`
//!   satisfies `2e > C(n,2) + ex(n, K_{t+1})`. Any two members intersect in
//!   more than `ex(n, K_{t+1})` edges and therefore contain a `K_{t+1}`.
//! * **FixedCopy**: graphs containing a specific labeled edge set. Its
//!   biased measure is exactly `p^(number of pattern edges)`.
//!
//! Degenerate bases: the Majority family is empty for `n` in {0, 1}, and
//! the recursive family on zero vertices is defined to be empty, which makes
//! every recursive family empty whenever `(p - 1/2)(n - 1) <= 1` and
//! `t >= 3` (the hereditary condition then reaches single-vertex subsets).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{self, pair_count, Graph, GraphError};
use crate::prob::{Probability, ProbabilityError};

/// Largest `n` accepted by the recursive oracle at `t = 3`.
pub const RECURSION_CAP_T3: usize = 20;
/// Largest `n` accepted by the recursive oracle at `t >= 4`.
pub const RECURSION_CAP_T4_PLUS: usize = 16;
/// Largest `C(n,2)` for which full enumeration of all graphs is allowed.
pub const ENUMERATION_CAP_BITS: u64 = 28;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("clique parameter t={t} is out of range (need t >= {min})")]
    InvalidCliqueParameter { t: u32, min: u32 },
    #[error("recursive families require p > 1/2, got {p}")]
    ProbabilityNotAboveHalf { p: Probability },
    #[error("n={n} exceeds the recursive-evaluation cap of {cap} for t={t}")]
    RecursionCapExceeded { n: usize, cap: usize, t: u32 },
    #[error("C({n},2) = {bits} exceeds the enumeration cap of {cap} bits")]
    EnumerationCapExceeded { n: usize, bits: u64, cap: u64 },
    #[error("fixed pattern is invalid: {0}")]
    InvalidPattern(String),
    #[error("pattern vertex {v} out of range for n={n}")]
    PatternVertexOutOfRange { v: usize, n: usize },
    #[error("cannot parse family spec {0:?}")]
    SpecSyntax(String),
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Memo table for one recursive-membership evaluation.
///
/// Entries are keyed by `(recursion level, subset mask of the original
/// vertex set)`, so nested induced subgraphs reuse each other's results.
/// A context is bound to the graph it first evaluates and resets itself
/// automatically when handed a different graph, so stale entries can never
/// leak across evaluations.
#[derive(Clone, Debug, Default)]
pub struct MembershipContext {
    memo: HashMap<(u32, u64), bool>,
    bound_to: Option<Graph>,
}

impl MembershipContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.memo.clear();
        self.bound_to = None;
    }

    fn rebind(&mut self, g: &Graph) {
        match &self.bound_to {
            Some(bound) if bound == g => {}
            _ => {
                self.memo.clear();
                self.bound_to = Some(g.clone());
            }
        }
    }
}

/// True iff `g` has strictly more than half of all `C(n,2)` possible edges.
pub fn majority_member(g: &Graph) -> bool {
    let pairs = pair_count(g.vertex_count() as u64);
    2 * g.edge_count() as u64 > pairs
}

fn majority_dense_on_mask(g: &Graph, mask: u64) -> bool {
    let m = mask.count_ones() as u64;
    2 * g.edges_within_mask(mask) as u64 > pair_count(m)
}

/// Default cap on `n` for recursive evaluation at level `t`.
pub fn recursion_cap(t: u32) -> usize {
    match t {
        0..=2 => graph::MAX_VERTICES,
        3 => RECURSION_CAP_T3,
        _ => RECURSION_CAP_T4_PLUS,
    }
}

/// Membership in the recursive level-`t` family with parameter `p`.
///
/// Exact evaluation enumerates all qualifying vertex subsets (worst case
/// `Theta(3^n)` with memoization), hence the cap on `n`; see
/// [`recursion_cap`]. `t = 2` delegates to [`majority_member`] and is
/// independent of `p`.
pub fn recursive_member(
    g: &Graph,
    t: u32,
    p: Probability,
    ctx: &mut MembershipContext,
) -> Result<bool, FamilyError> {
    recursive_member_with_cap(g, t, p, recursion_cap(t), ctx)
}

/// Same as [`recursive_member`] with an explicit cap on `n`.
pub fn recursive_member_with_cap(
    g: &Graph,
    t: u32,
    p: Probability,
    cap: usize,
    ctx: &mut MembershipContext,
) -> Result<bool, FamilyError> {
    if t < 2 {
        return Err(FamilyError::InvalidCliqueParameter { t, min: 2 });
    }
    if !p.is_above_half() {
        return Err(FamilyError::ProbabilityNotAboveHalf { p });
    }
    if t == 2 {
        return Ok(majority_member(g));
    }
    let n = g.vertex_count();
    if n > cap {
        return Err(FamilyError::RecursionCapExceeded { n, cap, t });
    }
    ctx.rebind(g);
    Ok(member_level(g, t, graph::low_bits(n), p, &mut ctx.memo))
}

/// Does the subgraph induced on `mask` belong to the level-`level` family?
fn member_level(
    g: &Graph,
    level: u32,
    mask: u64,
    p: Probability,
    memo: &mut HashMap<(u32, u64), bool>,
) -> bool {
    if level == 2 {
        // Level 2 is a single popcount comparison; memoizing it would cost
        // more than recomputing.
        return majority_dense_on_mask(g, mask);
    }
    if let Some(&cached) = memo.get(&(level, mask)) {
        return cached;
    }
    let result = member_level_uncached(g, level, mask, p, memo);
    memo.insert((level, mask), result);
    result
}

fn member_level_uncached(
    g: &Graph,
    level: u32,
    mask: u64,
    p: Probability,
    memo: &mut HashMap<(u32, u64), bool>,
) -> bool {
    let m = mask.count_ones() as u64;
    if m == 0 {
        // The zero-vertex family is empty at every level.
        return false;
    }
    // Edge-count floor first: it is O(m) and rejects most graphs.
    if (g.edges_within_mask(mask) as u64) < p.cond1_edge_floor(pair_count(m)) {
        return false;
    }
    // Every subset of size >= (p - 1/2)(m - 1) must induce a member one
    // level down. The empty subset never qualifies.
    let s_min = p.subset_size_floor(m).max(1) as u32;
    let mut sub = mask;
    loop {
        if sub.count_ones() >= s_min && !member_level(g, level - 1, sub, p, memo) {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & mask;
    }
}

/// The Turan number `ex(n, K_{t+1})`: the edge count of the balanced
/// complete `t`-partite graph on `n` vertices.
pub fn turan_number(n: u64, t: u32) -> u64 {
    assert!(t >= 1, "turan_number requires t >= 1");
    let t = t as u64;
    let q = n / t;
    let r = n % t;
    // r parts of size q+1 and t-r parts of size q.
    let internal = r * pair_count(q + 1) + (t - r) * pair_count(q);
    pair_count(n) - internal
}

/// True iff `2 * e(G) > C(n,2) + ex(n, K_{t+1})` (exact, strict).
///
/// Any two members then intersect in more than `ex(n, K_{t+1})` edges, so
/// their intersection contains a `K_{t+1}`.
pub fn turan_member(g: &Graph, t: u32) -> bool {
    let n = g.vertex_count() as u64;
    2 * g.edge_count() as u64 > pair_count(n) + turan_number(n, t)
}

/// True iff every edge of the fixed labeled pattern is present in `g`.
pub fn fixed_copy_member(g: &Graph, pattern: &[(usize, usize)]) -> Result<bool, FamilyError> {
    let n = g.vertex_count();
    for &(u, v) in pattern {
        let w = u.max(v);
        if w >= n {
            return Err(FamilyError::PatternVertexOutOfRange { v: w, n });
        }
    }
    Ok(pattern.iter().all(|&(u, v)| g.has_edge(u, v)))
}

/// A pure membership predicate over graphs on a common vertex count.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyOracle {
    Majority,
    Recursive { t: u32, p: Probability },
    TuranThreshold { t: u32 },
    FixedCopy { edges: Vec<(usize, usize)> },
}

impl FamilyOracle {
    pub fn majority() -> Self {
        FamilyOracle::Majority
    }

    pub fn recursive(t: u32, p: Probability) -> Result<Self, FamilyError> {
        if t < 2 {
            return Err(FamilyError::InvalidCliqueParameter { t, min: 2 });
        }
        if !p.is_above_half() {
            return Err(FamilyError::ProbabilityNotAboveHalf { p });
        }
        Ok(FamilyOracle::Recursive { t, p })
    }

    pub fn turan_threshold(t: u32) -> Result<Self, FamilyError> {
        if t < 1 {
            return Err(FamilyError::InvalidCliqueParameter { t, min: 1 });
        }
        Ok(FamilyOracle::TuranThreshold { t })
    }

    /// Pattern edges are canonicalized to `(min, max)`, sorted, deduplicated.
    pub fn fixed_copy(edges: Vec<(usize, usize)>) -> Result<Self, FamilyError> {
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(FamilyError::InvalidPattern(format!("loop at vertex {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(FamilyOracle::FixedCopy { edges: canon })
    }

    /// Checks that the oracle can be evaluated on graphs with `n` vertices.
    pub fn validate_feasible(&self, n: usize) -> Result<(), FamilyError> {
        match self {
            FamilyOracle::Majority | FamilyOracle::TuranThreshold { .. } => Ok(()),
            FamilyOracle::Recursive { t, .. } => {
                let cap = recursion_cap(*t);
                if *t >= 3 && n > cap {
                    return Err(FamilyError::RecursionCapExceeded { n, cap, t: *t });
                }
                Ok(())
            }
            FamilyOracle::FixedCopy { edges } => {
                for &(_, v) in edges {
                    if v >= n {
                        return Err(FamilyError::PatternVertexOutOfRange { v, n });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_member(&self, g: &Graph) -> Result<bool, FamilyError> {
        let mut ctx = MembershipContext::new();
        self.is_member_with_ctx(g, &mut ctx)
    }

    pub fn is_member_with_ctx(
        &self,
        g: &Graph,
        ctx: &mut MembershipContext,
    ) -> Result<bool, FamilyError> {
        match self {
            FamilyOracle::Majority => Ok(majority_member(g)),
            FamilyOracle::Recursive { t, p } => recursive_member(g, *t, *p, ctx),
            FamilyOracle::TuranThreshold { t } => Ok(turan_member(g, *t)),
            FamilyOracle::FixedCopy { edges } => fixed_copy_member(g, edges),
        }
    }

    /// Evaluation after [`FamilyOracle::validate_feasible`] has passed for
    /// this graph's vertex count; cannot fail.
    pub(crate) fn eval_validated(&self, g: &Graph, ctx: &mut MembershipContext) -> bool {
        self.is_member_with_ctx(g, ctx)
            .expect("oracle feasibility was validated for this vertex count")
    }

    /// Membership is invariant under vertex relabeling for every kind
    /// except `FixedCopy` (whose pattern is a specific labeled copy).
    pub fn is_label_invariant(&self) -> bool {
        !matches!(self, FamilyOracle::FixedCopy { .. })
    }
}

impl fmt::Display for FamilyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyOracle::Majority => write!(f, "f2"),
            FamilyOracle::Recursive { t, p } => write!(f, "ft:t={t},p={p}"),
            FamilyOracle::TuranThreshold { t } => write!(f, "turan:t={t}"),
            FamilyOracle::FixedCopy { edges } => {
                write!(f, "fixed:edges=")?;
                for (i, (u, v)) in edges.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{u}-{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for FamilyOracle {
    type Err = FamilyError;

    /// Family spec syntax: `f2`, `ft:t=3,p=3/4`, `turan:t=2`,
    /// `fixed:edges=0-1,1-2,0-2`. Probabilities parse as exact rationals
    /// (`3/4`) or finite decimals (`0.75`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "f2" {
            return Ok(FamilyOracle::Majority);
        }
        if let Some(rest) = s.strip_prefix("ft:") {
            let mut t: Option<u32> = None;
            let mut p: Option<Probability> = None;
            for part in rest.split(',') {
                match part.split_once('=') {
                    Some(("t", val)) => {
                        t = Some(
                            val.parse()
                                .map_err(|_| FamilyError::SpecSyntax(s.to_string()))?,
                        )
                    }
                    Some(("p", val)) => p = Some(val.parse()?),
                    _ => return Err(FamilyError::SpecSyntax(s.to_string())),
                }
            }
            let (t, p) = match (t, p) {
                (Some(t), Some(p)) => (t, p),
                _ => return Err(FamilyError::SpecSyntax(s.to_string())),
            };
            return FamilyOracle::recursive(t, p);
        }
        if let Some(rest) = s.strip_prefix("turan:") {
            let t = rest
                .strip_prefix("t=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| FamilyError::SpecSyntax(s.to_string()))?;
            return FamilyOracle::turan_threshold(t);
        }
        if let Some(rest) = s.strip_prefix("fixed:edges=") {
            let mut edges = Vec::new();
            for pair in rest.split(',') {
                let (a, b) = pair
                    .split_once('-')
                    .ok_or_else(|| FamilyError::SpecSyntax(s.to_string()))?;
                let u: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| FamilyError::SpecSyntax(s.to_string()))?;
                let v: usize = b
                    .trim()
                    .parse()
                    .map_err(|_| FamilyError::SpecSyntax(s.to_string()))?;
                edges.push((u, v));
            }
            if edges.is_empty() {
                return Err(FamilyError::SpecSyntax(s.to_string()));
            }
            return FamilyOracle::fixed_copy(edges);
        }
        Err(FamilyError::SpecSyntax(s.to_string()))
    }
}

/// Iterator over all member graphs on `n` vertices, in lexicographic order
/// of the edge subset (edge slots ordered (0,1), (0,2), .., (n-2,n-1)).
pub struct MemberIter {
    oracle: FamilyOracle,
    ctx: MembershipContext,
    scratch: Graph,
    slots: Vec<(usize, usize)>,
    current: u64,
    end: u64,
    started: bool,
}

impl Iterator for MemberIter {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        while self.current < self.end || !self.started {
            if self.started {
                // Flip exactly the edge slots where the mask changed.
                let prev = self.current;
                self.current += 1;
                if self.current >= self.end {
                    return None;
                }
                let mut delta = prev ^ self.current;
                while delta != 0 {
                    let slot = delta.trailing_zeros() as usize;
                    delta &= delta - 1;
                    let (u, v) = self.slots[slot];
                    self.scratch.flip_edge_unchecked(u, v);
                }
            } else {
                self.started = true;
                if self.end == 0 {
                    return None;
                }
            }
            if self.oracle.eval_validated(&self.scratch, &mut self.ctx) {
                return Some(self.scratch.clone());
            }
        }
        None
    }
}

/// Streams every graph on `n` vertices passing the oracle, deterministic
/// lexicographic order. Errors if `C(n,2)` exceeds [`ENUMERATION_CAP_BITS`]
/// or the oracle is infeasible at `n`.
pub fn enumerate_members(oracle: &FamilyOracle, n: usize) -> Result<MemberIter, FamilyError> {
    enumerate_members_with_cap(oracle, n, ENUMERATION_CAP_BITS)
}

pub fn enumerate_members_with_cap(
    oracle: &FamilyOracle,
    n: usize,
    cap_bits: u64,
) -> Result<MemberIter, FamilyError> {
    let bits = pair_count(n as u64);
    if bits > cap_bits {
        return Err(FamilyError::EnumerationCapExceeded {
            n,
            bits,
            cap: cap_bits,
        });
    }
    oracle.validate_feasible(n)?;
    Ok(MemberIter {
        oracle: oracle.clone(),
        ctx: MembershipContext::new(),
        scratch: Graph::empty(n)?,
        slots: graph::edge_slots(n),
        current: 0,
        end: 1u64 << bits,
        started: false,
    })
}
