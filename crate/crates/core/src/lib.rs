//! Clique-intersecting graph families and their biased measures.
//!
//! A family of graphs on a common labeled vertex set is `K_t`-intersecting
//! when the edge intersection of any two members contains a `t`-clique.
//! This crate builds and studies such families:
//!
//! * [`graph`] — bitset graphs on up to 64 vertices: intersection, induced
//!   subgraphs, clique search, G(n,p) sampling, graph6 encoding.
//! * [`families`] — membership oracles: the majority family, the recursive
//!   clique-intersecting construction, a Turan-threshold family, and
//!   fixed-copy families, all with exact rational thresholds.
//! * [`measure`] — the p-biased measure of a family: exact enumeration,
//!   the binomial closed form for the majority family, and reproducible
//!   parallel Monte Carlo.
//! * [`bounds`] — exact binomial tails, explicit KL-form Chernoff bounds,
//!   and certified union-bound lower bounds on the measure of the recursive
//!   families, including a search for the smallest `n` whose certified
//!   measure exceeds a target.
//! * [`verify`] — direct verification that member pairs intersect in the
//!   required clique, and a constructive witness extractor that walks the
//!   recursive structure.
//!
//! Everything randomized takes an explicit `u64` seed and is reproducible
//! bit-for-bit across platforms (see [`rng`]).
//!
//! ```
//! use kintersect::{bounds, measure, FamilyOracle, Probability};
//!
//! let p: Probability = "3/4".parse()?;
//!
//! // The majority family on 6 vertices: exact measure two ways.
//! let by_enumeration = measure::mu_exact(&FamilyOracle::Majority, 6, p)?;
//! let by_closed_form = measure::mu_closed_form_majority(6, p);
//! assert_eq!(by_enumeration.exact, by_closed_form.exact);
//!
//! // Certified lower bound on the K_3-intersecting construction's measure:
//! // past p^3 = 27/64 from n = 118 on.
//! let (n_star, cert) = bounds::find_counterexample_n(3, p, "27/64".parse()?)?;
//! assert_eq!(n_star, 118);
//! assert!(cert.lower_bound > 0.421875);
//! assert_eq!(cert.recompute_lower_bound(), cert.lower_bound);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bounds;
pub mod families;
pub mod graph;
pub mod measure;
pub mod prob;
pub mod rng;
pub mod verify;

pub use bounds::{BoundCertificate, BoundError, CertTerm};
pub use families::{FamilyError, FamilyOracle, MembershipContext};
pub use graph::{Graph, GraphError, VertexSet};
pub use measure::{MeasureError, MeasureEstimate, MeasureMethod};
pub use prob::{Probability, ProbabilityError};
pub use verify::{CliqueWitness, MemberSource, VerificationReport, VerifyError, VerifyMode};
