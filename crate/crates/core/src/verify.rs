//! Intersection verification and constructive clique witnesses.
//!
//! `verify_intersecting` checks the defining property directly on member
//! pairs: the edge intersection of any two members must contain a clique of
//! the target size. `extract_witness` goes further and produces an explicit
//! clique by walking the construction's induction: intersect, take the
//! neighborhood of a maximum-degree vertex, recurse one level down, and map
//! the result back.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::families::{enumerate_members, FamilyError, FamilyOracle, MembershipContext};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::measure::{mu_closed_form_majority, mu_monte_carlo, MeasureError, MeasureEstimate};
use crate::prob::Probability;
use crate::rng::SplitMix64;

/// Exhaustive verification materializes the whole family; cap its size so
/// the quadratic pair pass stays tractable.
pub const MAX_EXHAUSTIVE_MEMBERS: usize = 4096;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("no clique witness found: some input is not a member of the target family")]
    WitnessNotFound,
    #[error("clique parameter t={t} out of range (need t >= 2)")]
    InvalidT { t: u32 },
    #[error("exhaustive verification capped at {cap} members; family has more")]
    TooManyMembers { cap: usize },
    #[error("rejection sampling found no member within {draws} draws")]
    SamplingExhausted { draws: u64 },
    #[error("explicit member list is empty")]
    EmptyMemberList,
    #[error("supplied graph at index {index} is not a member of the family")]
    NonMemberSupplied { index: usize },
    #[error("supplied graph at index {index} has {got} vertices, expected {expected}")]
    WrongVertexCount {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("proof-step invariant violated at level {level}: |T| = {t_size} below the degree floor {floor}")]
    ProofInvariant {
        level: u32,
        t_size: usize,
        floor: u64,
    },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Where sampled verification gets its member graphs.
#[derive(Clone, Debug)]
pub enum MemberSource {
    /// Draw G(n, p) repeatedly until the oracle accepts, up to `max_draws`
    /// attempts per member. Hopeless when the family measure at `n` is
    /// tiny; supply an explicit list instead.
    RejectionGnp { p: Probability, max_draws: u64 },
    /// A caller-supplied pool of members. Each graph is re-checked against
    /// the oracle up front.
    Explicit(Vec<Graph>),
}

#[derive(Clone, Debug)]
pub enum VerifyMode {
    /// Enumerate the family and check every unordered member pair,
    /// including self-pairs.
    Exhaustive,
    /// Check `budget` random member pairs drawn via `source`.
    Sampled {
        budget: u64,
        seed: u64,
        source: MemberSource,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportMode {
    Exhaustive,
    Sampled,
}

impl fmt::Display for ReportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportMode::Exhaustive => "exhaustive",
            ReportMode::Sampled => "sampled",
        })
    }
}

/// Outcome of an intersection-verification run.
///
/// `failures` is empty iff every checked pair intersected in the required
/// clique. An empty family verifies vacuously but is flagged via
/// `family_empty`, never reported as plainly verified.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub mode: ReportMode,
    /// Distinct members enumerated (exhaustive) or pool size (explicit
    /// source); 0 for rejection sampling.
    pub members: u64,
    pub pairs_checked: u64,
    pub family_empty: bool,
    /// Failing pairs as graph6 strings, in check order.
    pub failures: Vec<(String, String)>,
    /// Histogram of extracted witness sizes over passing pairs.
    pub witness_sizes: BTreeMap<usize, u64>,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "verification-report");
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "members: {}", self.members);
        let _ = writeln!(out, "pairs_checked: {}", self.pairs_checked);
        let _ = writeln!(out, "family_empty: {}", self.family_empty);
        let _ = writeln!(out, "failures: {}", self.failures.len());
        for (a, b) in &self.failures {
            let _ = writeln!(out, "failure: {a} {b}");
        }
        let sizes: Vec<String> = self
            .witness_sizes
            .iter()
            .map(|(size, count)| format!("{size}:{count}"))
            .collect();
        let _ = writeln!(out, "witness_sizes: {}", sizes.join(" "));
        let _ = writeln!(out, "elapsed_ms: {}", self.elapsed.as_millis());
        out
    }
}

/// Checks that member pairs of the family intersect in a `K_target_t`.
pub fn verify_intersecting(
    oracle: &FamilyOracle,
    n: usize,
    target_t: u32,
    mode: VerifyMode,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    match mode {
        VerifyMode::Exhaustive => {
            let mut members = Vec::new();
            for g in enumerate_members(oracle, n)? {
                members.push(g);
                if members.len() > MAX_EXHAUSTIVE_MEMBERS {
                    return Err(VerifyError::TooManyMembers {
                        cap: MAX_EXHAUSTIVE_MEMBERS,
                    });
                }
            }
            let mut report = VerificationReport {
                mode: ReportMode::Exhaustive,
                members: members.len() as u64,
                pairs_checked: 0,
                family_empty: members.is_empty(),
                failures: Vec::new(),
                witness_sizes: BTreeMap::new(),
                elapsed: Duration::ZERO,
            };
            for i in 0..members.len() {
                for j in i..members.len() {
                    check_pair(&members[i], &members[j], target_t, &mut report)?;
                }
            }
            report.elapsed = start.elapsed();
            Ok(report)
        }
        VerifyMode::Sampled {
            budget,
            seed,
            source,
        } => {
            let mut rng = SplitMix64::new(seed);
            let mut report = VerificationReport {
                mode: ReportMode::Sampled,
                members: 0,
                pairs_checked: 0,
                family_empty: false,
                failures: Vec::new(),
                witness_sizes: BTreeMap::new(),
                elapsed: Duration::ZERO,
            };
            match source {
                MemberSource::Explicit(pool) => {
                    if pool.is_empty() {
                        return Err(VerifyError::EmptyMemberList);
                    }
                    let mut ctx = MembershipContext::new();
                    for (index, g) in pool.iter().enumerate() {
                        if g.vertex_count() != n {
                            return Err(VerifyError::WrongVertexCount {
                                index,
                                got: g.vertex_count(),
                                expected: n,
                            });
                        }
                        if !oracle.is_member_with_ctx(g, &mut ctx)? {
                            return Err(VerifyError::NonMemberSupplied { index });
                        }
                    }
                    report.members = pool.len() as u64;
                    for _ in 0..budget {
                        let i = rng.uniform_below(pool.len() as u64) as usize;
                        let j = rng.uniform_below(pool.len() as u64) as usize;
                        check_pair(&pool[i], &pool[j], target_t, &mut report)?;
                    }
                }
                MemberSource::RejectionGnp { p, max_draws } => {
                    oracle.validate_feasible(n)?;
                    let mut ctx = MembershipContext::new();
                    let draw_member = |rng: &mut SplitMix64,
                                       ctx: &mut MembershipContext|
                     -> Result<Graph, VerifyError> {
                        for _ in 0..max_draws {
                            let g = Graph::sample_gnp(n, p, rng.next_u64())?;
                            if oracle.eval_validated(&g, ctx) {
                                return Ok(g);
                            }
                        }
                        Err(VerifyError::SamplingExhausted { draws: max_draws })
                    };
                    for _ in 0..budget {
                        let a = draw_member(&mut rng, &mut ctx)?;
                        let b = draw_member(&mut rng, &mut ctx)?;
                        check_pair(&a, &b, target_t, &mut report)?;
                    }
                }
            }
            report.elapsed = start.elapsed();
            Ok(report)
        }
    }
}

fn check_pair(
    a: &Graph,
    b: &Graph,
    target_t: u32,
    report: &mut VerificationReport,
) -> Result<(), VerifyError> {
    let meet = a.intersect(b)?;
    report.pairs_checked += 1;
    match meet.find_clique(target_t as usize) {
        Some(witness) => {
            *report.witness_sizes.entry(witness.len()).or_insert(0) += 1;
        }
        None => {
            report.failures.push((a.to_graph6()?, b.to_graph6()?));
        }
    }
    Ok(())
}

/// An explicit clique in the intersection of two family members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueWitness {
    pub vertices: VertexSet,
    pub t: u32,
}

/// Extracts a `K_t` from `intersect(g1, g2)` by replaying the inductive
/// construction; both inputs are assumed (not re-verified) to be members of
/// the recursive level-`t` family at `p`.
///
/// Level 2 returns the lexicographically smallest common edge. Higher
/// levels pick a maximum-degree vertex `v` of the intersection (ties to the
/// lowest index), recurse on the subgraphs induced by its neighborhood, map
/// indices back, and prepend `v`. The result is checked pairwise-adjacent
/// in the intersection before returning, so a violated precondition can
/// only produce [`VerifyError::WitnessNotFound`], never a bogus witness.
pub fn extract_witness(
    g1: &Graph,
    g2: &Graph,
    t: u32,
    p: Probability,
) -> Result<CliqueWitness, VerifyError> {
    extract_witness_inner(g1, g2, t, p, false)
}

/// Like [`extract_witness`] but re-verifies membership of both inputs first
/// (exponential in `n`; opt-in) and enforces the degree-floor invariant
/// `|T| >= (p - 1/2)(n - 1)` at every level of the recursion.
pub fn extract_witness_checked(
    g1: &Graph,
    g2: &Graph,
    t: u32,
    p: Probability,
) -> Result<CliqueWitness, VerifyError> {
    let mut ctx = MembershipContext::new();
    for g in [g1, g2] {
        if !crate::families::recursive_member(g, t, p, &mut ctx)? {
            return Err(VerifyError::WitnessNotFound);
        }
    }
    extract_witness_inner(g1, g2, t, p, true)
}

fn extract_witness_inner(
    g1: &Graph,
    g2: &Graph,
    t: u32,
    p: Probability,
    enforce_invariant: bool,
) -> Result<CliqueWitness, VerifyError> {
    if t < 2 {
        return Err(VerifyError::InvalidT { t });
    }
    let meet = g1.intersect(g2)?;
    let vertices = match witness_recurse(g1, g2, t, p, enforce_invariant)? {
        Some(vertices) => vertices,
        None => return Err(VerifyError::WitnessNotFound),
    };
    // Terminal soundness check in the top-level intersection.
    if vertices.len() != t as usize {
        return Err(VerifyError::WitnessNotFound);
    }
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            if !meet.has_edge(u, v) {
                return Err(VerifyError::WitnessNotFound);
            }
        }
    }
    Ok(CliqueWitness {
        vertices: VertexSet::from_members(meet.vertex_count(), &vertices)?,
        t,
    })
}

fn witness_recurse(
    g1: &Graph,
    g2: &Graph,
    t: u32,
    p: Probability,
    enforce_invariant: bool,
) -> Result<Option<Vec<usize>>, VerifyError> {
    let meet = g1.intersect(g2)?;
    let n = meet.vertex_count();
    if t == 2 {
        // Lexicographically smallest common edge.
        for u in 0..n {
            for v in (u + 1)..n {
                if meet.has_edge(u, v) {
                    return Ok(Some(vec![u, v]));
                }
            }
        }
        return Ok(None);
    }
    if n == 0 {
        return Ok(None);
    }
    let v = meet.max_degree_vertex()?;
    let hood = meet.neighbors(v)?;
    if enforce_invariant {
        let floor = p.subset_size_floor(n as u64);
        if (hood.len() as u64) < floor {
            return Err(VerifyError::ProofInvariant {
                level: t,
                t_size: hood.len(),
                floor,
            });
        }
    }
    if hood.is_empty() {
        return Ok(None);
    }
    let sub1 = g1.induced_subgraph(hood)?;
    let sub2 = g2.induced_subgraph(hood)?;
    let inner = match witness_recurse(&sub1, &sub2, t - 1, p, enforce_invariant)? {
        Some(inner) => inner,
        None => return Ok(None),
    };
    // Map local indices back through the sorted members of the neighborhood.
    let members = hood.to_vec();
    let mut vertices = Vec::with_capacity(t as usize);
    vertices.push(v);
    for local in inner {
        vertices.push(members[local]);
    }
    Ok(Some(vertices))
}

/// Measure sweep across a probability grid: the closed form for the
/// majority family, Monte Carlo (with per-point substream seeds) otherwise.
pub fn sharp_threshold_sweep(
    oracle: &FamilyOracle,
    n: usize,
    p_grid: &[Probability],
    samples: u64,
    seed: u64,
) -> Result<Vec<(Probability, MeasureEstimate)>, MeasureError> {
    let mut rows = Vec::with_capacity(p_grid.len());
    for (index, &p) in p_grid.iter().enumerate() {
        let estimate = match oracle {
            FamilyOracle::Majority => mu_closed_form_majority(n as u64, p),
            _ => mu_monte_carlo(
                oracle,
                n,
                p,
                samples,
                crate::rng::substream_seed(seed, index as u64),
            )?,
        };
        rows.push((p, estimate));
    }
    Ok(rows)
}

/// Targeted instance generators for sampled verification and
/// characterization checks.
pub mod generators {
    use super::*;

    /// Complement of a uniformly chosen partial matching on `n` vertices
    /// (a random number of disjoint pairs removed from the complete graph).
    pub fn matching_complement(n: usize, seed: u64) -> Graph {
        let mut rng = SplitMix64::new(seed);
        let mut vertices: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut vertices);
        let pairs = rng.uniform_below(n as u64 / 2 + 1) as usize;
        let mut co = Graph::empty(n).expect("n validated by caller");
        for i in 0..pairs {
            co.set_edge_unchecked(vertices[2 * i], vertices[2 * i + 1], true);
        }
        co.complement()
    }

    /// A graph whose complement contains two incident edges (a 2-path),
    /// plus a few extra random complement edges. Such graphs always have
    /// some 3-subset inducing at most one edge.
    pub fn two_path_complement(n: usize, seed: u64) -> Graph {
        assert!(n >= 3, "need at least 3 vertices for a 2-path");
        let mut rng = SplitMix64::new(seed);
        let mut vertices: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut vertices);
        let (a, b, c) = (vertices[0], vertices[1], vertices[2]);
        let mut co = Graph::empty(n).expect("n validated by caller");
        co.set_edge_unchecked(a, b, true);
        co.set_edge_unchecked(a, c, true);
        for _ in 0..rng.uniform_below(4) {
            let u = rng.uniform_below(n as u64) as usize;
            let v = rng.uniform_below(n as u64) as usize;
            if u != v {
                co.set_edge_unchecked(u, v, true);
            }
        }
        co.complement()
    }
}
