//! Binomial tails, explicit Chernoff bounds, and the certified union-bound
//! engine.
//!
//! Every certificate produced here is a fully itemized ledger: a
//! condition-failure probability for the edge-count floor plus one row per
//! qualifying subset size, each an exact subset count times a recursively
//! certified per-subset failure bound. No unspecified constants appear
//! anywhere; re-summing the rows reproduces the stated lower bound exactly.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::pair_count;
use crate::prob::Probability;

/// Largest trial count for which the exact-rational tail is offered.
pub const EXACT_TAIL_CAP: u64 = 2000;

/// Search ceiling for [`find_counterexample_n`].
pub const COUNTEREXAMPLE_SEARCH_CAP: u64 = 100_000;

pub type BigRational = Ratio<BigInt>;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("threshold k={k} exceeds trial count {n}")]
    TailRange { n: u64, k: u64 },
    #[error("exact tail supported for n <= {cap}, got {n}")]
    ExactCapExceeded { n: u64, cap: u64 },
    #[error("divergence arguments must lie strictly inside (0,1), got ({a}, {b})")]
    KlDomain { a: f64, b: f64 },
    #[error("bound requires p' < p, got p'={p_prime}, p={p}")]
    ChernoffOrdering {
        p_prime: Probability,
        p: Probability,
    },
    #[error("certified lower bounds require p > 1/2, got {p}")]
    ProbabilityNotAboveHalf { p: Probability },
    #[error("clique parameter t={t} out of range (need t >= 2)")]
    InvalidT { t: u32 },
    #[error(
        "no n <= {cap} certifies a bound above the target; the certificate attempted at the cap is attached"
    )]
    NotFoundWithinCap {
        cap: u64,
        certificate: Box<BoundCertificate>,
    },
}

// ---------------------------------------------------------------------------
// Binomial tails
// ---------------------------------------------------------------------------

/// `Pr[Bin(n, p) <= k]`.
///
/// Uses the exact rational summation for `n <=` [`EXACT_TAIL_CAP`] (rounded
/// once to the nearest f64), and stable log-space summation otherwise.
pub fn binom_tail_le(n: u64, p: Probability, k: u64) -> Result<f64, BoundError> {
    if k > n {
        return Err(BoundError::TailRange { n, k });
    }
    Ok(tail_f64(n, p, k))
}

pub(crate) fn tail_f64(n: u64, p: Probability, k: u64) -> f64 {
    tail_f64_ln(n, p, k).0
}

/// The tail and its natural log from one pass over shared intermediates.
pub(crate) fn tail_f64_ln(n: u64, p: Probability, k: u64) -> (f64, f64) {
    debug_assert!(k <= n);
    if k >= n {
        return (1.0, 0.0);
    }
    if n <= EXACT_TAIL_CAP {
        let exact = tail_exact(n, p, k);
        let (num, den) = (exact.numer().magnitude(), exact.denom().magnitude());
        return (big_ratio_to_f64(num, den), big_ln(num) - big_ln(den));
    }
    let m = max_term_index(n, p, k);
    let acc = ratio_sum(n, p, k, m);
    if n <= DD_TAIL_CAP {
        let term = central_term_dd(n, p, m);
        (term.times_f64(acc).clamp(0.0, 1.0), term.ln_times(acc))
    } else {
        let ln_tail = stirling_ln_term(n, p, m) + acc.ln();
        (ln_tail.exp().clamp(0.0, 1.0), ln_tail)
    }
}

/// `Pr[Bin(n, p) <= k]` as an exact rational. Restricted to
/// `n <=` [`EXACT_TAIL_CAP`] to keep big-integer growth bounded.
pub fn binom_tail_le_exact(n: u64, p: Probability, k: u64) -> Result<BigRational, BoundError> {
    if k > n {
        return Err(BoundError::TailRange { n, k });
    }
    if n > EXACT_TAIL_CAP {
        return Err(BoundError::ExactCapExceeded {
            n,
            cap: EXACT_TAIL_CAP,
        });
    }
    Ok(tail_exact(n, p, k))
}

fn tail_exact(n: u64, p: Probability, k: u64) -> BigRational {
    let num = BigUint::from(p.numer());
    let rest = BigUint::from(p.denom() - p.numer());
    let den = BigUint::from(p.denom());
    // term_i = C(n,i) * num^i * rest^(n-i); accumulate over the common
    // denominator den^n.
    let mut term = rest.pow(n as u32);
    let mut sum = term.clone();
    for i in 0..k {
        // C(n,i+1)/C(n,i) = (n-i)/(i+1); divisions are exact in this order.
        term = term * (n - i) * &num / ((i + 1) * &rest);
        sum += &term;
    }
    Ratio::new(BigInt::from(sum), BigInt::from(den.pow(n as u32)))
}

/// Largest trial count handled by the double-double scaled-product path;
/// beyond it the Stirling-series log path takes over.
const DD_TAIL_CAP: u64 = 2_000_000;

/// `Pr[Bin(n, p) <= k]` without exact rationals.
///
/// The sum runs over term ratios around the largest term in range. Up to
/// [`DD_TAIL_CAP`] trials the central term is a scaled product evaluated in
/// double-double precision (relative error well below 1e-12; agreement with
/// the exact mode is pinned by tests for every `n <=` [`EXACT_TAIL_CAP`]).
/// Beyond that the central term comes from a Stirling-series `ln n!`, whose
/// cancellation limits accuracy to roughly 1e-9 relative.
pub fn binom_tail_le_log(n: u64, p: Probability, k: u64) -> Result<f64, BoundError> {
    if k > n {
        return Err(BoundError::TailRange { n, k });
    }
    Ok(tail_log(n, p, k))
}

fn tail_log(n: u64, p: Probability, k: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    let m = max_term_index(n, p, k);
    let acc = ratio_sum(n, p, k, m);
    if n <= DD_TAIL_CAP {
        central_term_dd(n, p, m).times_f64(acc).clamp(0.0, 1.0)
    } else {
        (stirling_ln_term(n, p, m) + acc.ln()).exp().clamp(0.0, 1.0)
    }
}

/// Natural log of `Pr[Bin(n, p) <= k]`, representable even when the tail
/// itself lies far below the f64 range.
pub fn binom_tail_le_ln(n: u64, p: Probability, k: u64) -> Result<f64, BoundError> {
    if k > n {
        return Err(BoundError::TailRange { n, k });
    }
    Ok(tail_ln(n, p, k))
}

/// Log-scale tail used by the bound engine so failure masses keep their
/// magnitudes instead of flushing to zero.
pub(crate) fn tail_ln(n: u64, p: Probability, k: u64) -> f64 {
    tail_f64_ln(n, p, k).1
}

/// Index of the largest term within `[0, k]`: the unrestricted mode is
/// `floor((n+1) p)`.
fn max_term_index(n: u64, p: Probability, k: u64) -> u64 {
    let mode = ((n as u128 + 1) * p.numer() as u128 / p.denom() as u128) as u64;
    mode.min(k)
}

/// `term_m = C(n,m) p^m q^(n-m)` as an exactly tracked scaled product:
/// `prod_{i=1..m} ((n-m+i) num) / (i den)`, times `(rest/den)^(n-m)`.
fn central_term_dd(n: u64, p: Probability, m: u64) -> ScaledDd {
    let num = p.numer() as u128;
    let den = p.denom() as u128;
    let rest = den - num;
    let mut term = ScaledDd::one();
    for i in 1..=m as u128 {
        let factor = Dd::from_u128((n as u128 - m as u128 + i) * num).div(Dd::from_u128(i * den));
        term.mul_dd(factor);
    }
    term.mul_pow(Dd::from_u128(rest).div(Dd::from_u128(den)), n - m);
    term
}

fn stirling_ln_term(n: u64, p: Probability, m: u64) -> f64 {
    let ln_p = (p.numer() as f64).ln() - (p.denom() as f64).ln();
    let ln_q = ((p.denom() - p.numer()) as f64).ln() - (p.denom() as f64).ln();
    ln_choose(n, m) + m as f64 * ln_p + (n - m) as f64 * ln_q
}

/// Kahan sum of `term_i / term_m` for `i` in `[0, k]`, walking outward from
/// `m`; terms decay on both sides of `m`, so the walk stops once further
/// terms cannot affect the sum.
fn ratio_sum(n: u64, p: Probability, k: u64, m: u64) -> f64 {
    let pf = p.numer() as f64 / p.denom() as f64;
    let qf = (p.denom() - p.numer()) as f64 / p.denom() as f64;
    let mut acc = 1.0f64;
    let mut carry = 0.0f64;
    let mut add = |acc: &mut f64, term: f64| {
        let y = term - carry;
        let t = *acc + y;
        carry = (t - *acc) - y;
        *acc = t;
    };
    let mut ratio = 1.0f64;
    let mut i = m;
    while i > 0 {
        // term_{i-1} / term_i = (i q) / ((n - i + 1) p)
        ratio *= (i as f64 * qf) / ((n - i + 1) as f64 * pf);
        add(&mut acc, ratio);
        if ratio < 1e-19 * acc {
            break;
        }
        i -= 1;
    }
    ratio = 1.0;
    let mut j = m;
    while j < k {
        // term_{j+1} / term_j = ((n - j) p) / ((j + 1) q)
        ratio *= ((n - j) as f64 * pf) / ((j + 1) as f64 * qf);
        add(&mut acc, ratio);
        if ratio < 1e-19 * acc {
            break;
        }
        j += 1;
    }
    acc
}

// Minimal double-double arithmetic for the scaled-product tail. `mul_add`
// guarantees a single rounding, so `two_prod` captures the exact product
// error on any target.

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Exact for `x < 2^106`.
    fn from_u128(x: u128) -> Dd {
        debug_assert!(x < (1u128 << 106));
        let hi = ((x >> 53) as f64) * 9007199254740992.0; // * 2^53, exact
        let lo = (x & ((1u128 << 53) - 1)) as f64;
        two_sum(hi, lo)
    }

    fn mul(self, rhs: Dd) -> Dd {
        let p = two_prod(self.hi, rhs.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * rhs.lo + self.lo * rhs.hi))
    }

    fn mul_f64(self, f: f64) -> Dd {
        let p = two_prod(self.hi, f);
        quick_two_sum(p.hi, p.lo + self.lo * f)
    }

    fn sub(self, rhs: Dd) -> Dd {
        let s = two_sum(self.hi, -rhs.hi);
        quick_two_sum(s.hi, s.lo + (self.lo - rhs.lo))
    }

    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        quick_two_sum(q1, q2)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact when `f` is a power of two and no over/underflow occurs.
    fn scale(self, f: f64) -> Dd {
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }
}

/// Double-double mantissa with a separate power-of-two exponent, for
/// products whose magnitude leaves the f64 range.
struct ScaledDd {
    mant: Dd,
    exp2: i64,
}

const SCALE_UP: f64 = 1.3407807929942597e154; // 2^512
const SCALE_DOWN: f64 = 7.458340731200207e-155; // 2^-512

impl ScaledDd {
    fn one() -> Self {
        Self {
            mant: Dd::ONE,
            exp2: 0,
        }
    }

    fn renorm(&mut self) {
        let a = self.mant.hi.abs();
        if a == 0.0 {
            self.exp2 = 0;
            return;
        }
        while self.mant.hi.abs() >= SCALE_UP {
            self.mant = self.mant.scale(SCALE_DOWN);
            self.exp2 += 512;
        }
        while self.mant.hi.abs() < SCALE_DOWN {
            self.mant = self.mant.scale(SCALE_UP);
            self.exp2 -= 512;
        }
    }

    fn mul_dd(&mut self, f: Dd) {
        self.mant = self.mant.mul(f);
        self.renorm();
    }

    /// Multiplies by `base^e` via square-and-multiply.
    fn mul_pow(&mut self, base: Dd, mut e: u64) {
        let mut sq = ScaledDd {
            mant: base,
            exp2: 0,
        };
        sq.renorm();
        while e > 0 {
            if e & 1 == 1 {
                self.mant = self.mant.mul(sq.mant);
                self.exp2 += sq.exp2;
                self.renorm();
            }
            e >>= 1;
            if e > 0 {
                sq.mant = sq.mant.mul(sq.mant);
                sq.exp2 *= 2;
                sq.renorm();
            }
        }
    }

    /// `(self * factor) * 2^exp2` as f64, flushing out-of-range values to
    /// 0 or infinity.
    fn times_f64(&self, factor: f64) -> f64 {
        let mut x = self.mant.to_f64() * factor;
        let mut e = self.exp2;
        while e > 0 && x.is_finite() && x != 0.0 {
            let step = e.min(512);
            x *= 2.0f64.powi(step as i32);
            e -= step;
        }
        while e < 0 && x != 0.0 && x.is_finite() {
            let step = (-e).min(512);
            x *= 2.0f64.powi(-(step as i32));
            e += step;
        }
        x
    }

    /// `ln((self * factor) * 2^exp2)`, finite for any positive value.
    fn ln_times(&self, factor: f64) -> f64 {
        (self.mant.to_f64() * factor).ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive big integer, from its top 53 bits.
fn big_ln(x: &BigUint) -> f64 {
    debug_assert!(!x.is_zero());
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("small value converts").ln();
    }
    let top = (x >> (bits - 53)).to_f64().expect("53-bit value converts");
    top.ln() + (bits - 53) as f64 * std::f64::consts::LN_2
}

/// `ln(n!)`: cumulative table below 1024, Stirling series beyond.
fn ln_factorial(n: u64) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 1024];
        for i in 2..1024usize {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    x * x.ln() - x + 0.5 * (ln_2pi + x.ln()) + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
        - 1.0 / (1680.0 * x.powi(7))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

// ---------------------------------------------------------------------------
// KL divergence and the explicit Chernoff form
// ---------------------------------------------------------------------------

/// Binary Kullback-Leibler divergence `D(a || b)` in nats:
/// `a ln(a/b) + (1-a) ln((1-a)/(1-b))`. Zero iff `a = b`.
pub fn kl_divergence(a: f64, b: f64) -> Result<f64, BoundError> {
    if !(0.0 < a && a < 1.0 && 0.0 < b && b < 1.0) {
        return Err(BoundError::KlDomain { a, b });
    }
    Ok(a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln())
}

/// Explicit Chernoff upper bound `Pr[Bin(n,p) <= p' n] <= exp(-n D(p' || p))`
/// for `p' < p`.
pub fn chernoff_upper(n: u64, p: Probability, p_prime: Probability) -> Result<f64, BoundError> {
    if p_prime >= p {
        return Err(BoundError::ChernoffOrdering { p_prime, p });
    }
    let d = kl_divergence(p_prime.as_f64(), p.as_f64())?;
    Ok((-(n as f64) * d).exp())
}

// ---------------------------------------------------------------------------
// Union-bound certificates
// ---------------------------------------------------------------------------

/// One row of a certificate's subset table: all subsets of one size,
/// bounded by `subset_count * per_subset_failure`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertTerm {
    pub subset_size: u64,
    /// `C(n, subset_size)`, exact.
    pub subset_count: BigUint,
    /// Certified failure bound one level down at this size.
    pub per_subset_failure: f64,
    /// Natural log of the same bound; keeps the magnitude when the bound
    /// lies below the f64 range, so every row stays checkable.
    pub per_subset_failure_ln: f64,
    /// `subset_count * per_subset_failure`, routed through the logs (and
    /// conservatively rounded up) when either factor leaves the f64 range.
    pub product: f64,
}

/// Itemized lower bound on the biased measure of the recursive level-`t`
/// family on `n` vertices.
///
/// `lower_bound = max(0, 1 - term_cond1 - sum of products)`, with the sum
/// taken over `terms_cond2` in ascending subset size — exactly the
/// recomputation [`BoundCertificate::recompute_lower_bound`] performs.
///
/// When the running bound hits zero the remaining rows cannot raise it, so
/// the table stops there and `truncated` is set; a truncated table still
/// recomputes to the same (zero) bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate {
    pub t: u32,
    pub n: u64,
    pub p: Probability,
    /// Failure bound for the edge-count floor: `Pr[Bin(C(n,2), p) < ceil]`
    /// at the exact rational threshold (for `t = 2`, the membership tail
    /// itself). Set to 1 for the degenerate zero-vertex families, whose
    /// measure is 0.
    pub term_cond1: f64,
    /// Natural log of the condition-1 failure bound (negative infinity
    /// when the edge floor is 0 and failure is impossible).
    pub term_cond1_ln: f64,
    pub terms_cond2: Vec<CertTerm>,
    pub truncated: bool,
    pub lower_bound: f64,
}

impl BoundCertificate {
    /// Re-derives the lower bound from the listed terms, in the documented
    /// order. Bit-identical to `lower_bound`.
    pub fn recompute_lower_bound(&self) -> f64 {
        let mut raw = 1.0 - self.term_cond1;
        for term in &self.terms_cond2 {
            raw -= term.product;
        }
        raw.max(0.0)
    }

    /// Serializes the certificate as a line-oriented text document so the
    /// arithmetic can be re-verified independently.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "union-bound-certificate v1");
        let _ = writeln!(out, "t: {}", self.t);
        let _ = writeln!(out, "n: {}", self.n);
        let _ = writeln!(out, "p: {}", self.p);
        let pairs = pair_count(self.n);
        let _ = writeln!(out, "edge_pairs: {pairs}");
        if self.t == 2 {
            let _ = writeln!(out, "cond1_count_floor: {}", pairs / 2 + 1);
        } else {
            let _ = writeln!(out, "cond1_count_floor: {}", self.p.cond1_edge_floor(pairs));
        }
        let _ = writeln!(out, "term_cond1: {}", fmt_f64(self.term_cond1));
        let _ = writeln!(out, "term_cond1_ln: {}", fmt_f64(self.term_cond1_ln));
        let _ = writeln!(out, "subset_terms: {}", self.terms_cond2.len());
        let _ = writeln!(
            out,
            "columns: size subsets per_subset_failure per_subset_failure_ln product"
        );
        for term in &self.terms_cond2 {
            let _ = writeln!(
                out,
                "term: {} {} {} {} {}",
                term.subset_size,
                term.subset_count,
                fmt_f64(term.per_subset_failure),
                fmt_f64(term.per_subset_failure_ln),
                fmt_f64(term.product),
            );
        }
        let _ = writeln!(out, "truncated: {}", self.truncated);
        let _ = writeln!(out, "lower_bound: {}", fmt_f64(self.lower_bound));
        out
    }
}

/// 17-significant-digit decimal rendering used in all serialized records.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An upper bound on the failure mass `1 - mu` of one family level,
/// carried both as a plain f64 and as a natural log.
///
/// The direct value is what certificates display and subtract; the log
/// keeps the true magnitude when the value is too small for f64 (failure
/// masses around e^-4000 arise routinely), so products with astronomically
/// large subset counts can still be formed instead of degenerating to
/// `inf * 0 = NaN`. Bounds are never derived as `1 - lower_bound`, which
/// would flush the same masses to zero through cancellation.
#[derive(Clone, Copy, Debug)]
struct FailureBound {
    value: f64,
    ln: f64,
}

/// Memo of certified failure bounds keyed by (level, vertex count);
/// level-2 values are shared by every certificate built from one cache.
#[derive(Default)]
struct FailureCache {
    values: HashMap<(u32, u64), FailureBound>,
}

impl FailureCache {
    fn failure_bound(&mut self, t: u32, n: u64, p: Probability) -> FailureBound {
        if let Some(&v) = self.values.get(&(t, n)) {
            return v;
        }
        let v = if t == 2 {
            // Failure of the majority family is the tail itself.
            let pairs = pair_count(n);
            let (value, ln) = tail_f64_ln(pairs, p, pairs / 2);
            FailureBound { value, ln }
        } else {
            build_certificate_impl(t, n, p, self).1
        };
        self.values.insert((t, n), v);
        v
    }
}

fn build_certificate(t: u32, n: u64, p: Probability, cache: &mut FailureCache) -> BoundCertificate {
    build_certificate_impl(t, n, p, cache).0
}

/// Products outside the f64 range route through logs: masses below
/// `exp(LN_DROP)` are dropped (cumulatively hundreds of orders under every
/// stated tolerance), masses above `exp(LN_SAT)` saturate to infinity, and
/// anything in between is inflated by `LOG_ROUTE_SLACK` so the log route
/// only ever overstates failure. The drop threshold stays inside the
/// normal f64 range: subnormal rounding would otherwise exceed the slack.
const LN_DROP: f64 = -700.0;
const LN_SAT: f64 = 709.0;
const LOG_ROUTE_SLACK: f64 = 1e-6;

/// Builds the ledger plus the failure bound `min(1, term_cond1 + sum of
/// products)` consumed one level up, the latter aggregated in log space so
/// it survives under- and overflow.
fn build_certificate_impl(
    t: u32,
    n: u64,
    p: Probability,
    cache: &mut FailureCache,
) -> (BoundCertificate, FailureBound) {
    debug_assert!(t >= 2);
    debug_assert!(p.is_above_half());
    if t == 2 {
        // Membership is the pure edge-count event, so the tail IS the exact
        // measure: mu = Pr[Bin(C(n,2), p) > C(n,2)/2].
        let pairs = pair_count(n);
        let (a, ln_a) = tail_f64_ln(pairs, p, pairs / 2);
        let cert = BoundCertificate {
            t,
            n,
            p,
            term_cond1: a,
            term_cond1_ln: ln_a,
            terms_cond2: Vec::new(),
            truncated: false,
            lower_bound: (1.0 - a).max(0.0),
        };
        return (cert, FailureBound { value: a, ln: ln_a });
    }
    if n == 0 {
        // The zero-vertex family is empty by definition; report the whole
        // failure mass on the first term so the ledger recomputes to 0.
        let cert = BoundCertificate {
            t,
            n,
            p,
            term_cond1: 1.0,
            term_cond1_ln: 0.0,
            terms_cond2: Vec::new(),
            truncated: false,
            lower_bound: 0.0,
        };
        return (
            cert,
            FailureBound {
                value: 1.0,
                ln: 0.0,
            },
        );
    }
    let pairs = pair_count(n);
    // Condition-1 failure: edge count strictly below the rational floor.
    let count_floor = p.cond1_edge_floor(pairs);
    let (a, ln_a) = if count_floor == 0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        tail_f64_ln(pairs, p, count_floor - 1)
    };
    let s_min = p.subset_size_floor(n).max(1);
    let mut raw = 1.0 - a;
    let mut terms = Vec::new();
    let mut ln_masses = vec![ln_a];
    let mut truncated = false;
    let mut count = binomial_exact(n, s_min);
    let mut s = s_min;
    loop {
        let child = cache.failure_bound(t - 1, s, p);
        let count_f64 = biguint_to_f64(&count);
        let ln_product = big_ln(&count) + child.ln;
        let product = if count_f64.is_finite() && child.value > 0.0 {
            count_f64 * child.value
        } else if ln_product < LN_DROP {
            0.0
        } else if ln_product > LN_SAT {
            f64::INFINITY
        } else {
            (ln_product + LOG_ROUTE_SLACK).exp()
        };
        debug_assert!(!product.is_nan());
        raw -= product;
        ln_masses.push(if product.is_finite() && product > 0.0 {
            product.ln()
        } else {
            ln_product
        });
        terms.push(CertTerm {
            subset_size: s,
            subset_count: count.clone(),
            per_subset_failure: child.value,
            per_subset_failure_ln: child.ln,
            product,
        });
        if raw <= 0.0 {
            truncated = s < n;
            break;
        }
        if s == n {
            break;
        }
        s += 1;
        count = count * (n - s + 1) / s;
    }
    let lower_bound = raw.max(0.0);
    let fail = if lower_bound == 0.0 {
        // Clamped (possibly truncated) ledger: the trivial failure bound.
        FailureBound {
            value: 1.0,
            ln: 0.0,
        }
    } else {
        let mut sum = a;
        for term in &terms {
            sum += term.product;
        }
        FailureBound {
            value: sum.min(1.0),
            ln: log_sum_exp(&ln_masses).min(0.0),
        }
    };
    let cert = BoundCertificate {
        t,
        n,
        p,
        term_cond1: a,
        term_cond1_ln: ln_a,
        terms_cond2: terms,
        truncated,
        lower_bound,
    };
    (cert, fail)
}

/// `ln(sum of exp(x_i))`, ignoring empty (negative-infinity) entries.
fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `C(n, k)` exactly; `k <= n` required.
fn binomial_exact(n: u64, k: u64) -> BigUint {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 0..k {
        result = result * (n - i) / (i + 1);
    }
    result
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Converts `num/den` to the nearest f64 (relative error below 2^-52).
/// Values under ~1e-300 may flush to zero.
pub(crate) fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    debug_assert!(!den.is_zero());
    let shift = den.bits() as i64 + 64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num.clone() << shift as u64) / den
    } else {
        num / (den.clone() << (-shift) as u64)
    };
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    qf * exp2i(-shift)
}

fn exp2i(e: i64) -> f64 {
    if e >= 1024 {
        f64::INFINITY
    } else if e <= -1075 {
        0.0
    } else {
        2.0f64.powi(e as i32)
    }
}

/// Certified lower bound on the biased measure of the recursive level-`t`
/// family on `n` vertices. Pure arithmetic: no graph is ever built, so `n`
/// has no capacity cap.
///
/// For `t = 2` the bound equals the exact measure (the membership event is
/// a binomial tail). For `t >= 3` it is the union bound: one exact tail for
/// the edge-count floor plus, for every qualifying subset size `s`, the
/// number of subsets times one minus the certified bound at size `s` one
/// level down.
pub fn mu_lower_bound(t: u32, n: u64, p: Probability) -> Result<BoundCertificate, BoundError> {
    if t < 2 {
        return Err(BoundError::InvalidT { t });
    }
    if !p.is_above_half() {
        return Err(BoundError::ProbabilityNotAboveHalf { p });
    }
    let mut cache = FailureCache::default();
    Ok(build_certificate(t, n, p, &mut cache))
}

/// Finds the smallest `n` whose certified lower bound exceeds `target`.
///
/// Probes by doubling, narrows by binary search, then scans every `n` below
/// the crossing found (the certified bound is expected but not proven to be
/// monotone in `n`, so the scan guards against an earlier crossing). Errors
/// with the certificate attempted at the cap when no `n <=`
/// [`COUNTEREXAMPLE_SEARCH_CAP`] works.
pub fn find_counterexample_n(
    t: u32,
    p: Probability,
    target: Probability,
) -> Result<(u64, BoundCertificate), BoundError> {
    find_counterexample_n_with_cap(t, p, target, COUNTEREXAMPLE_SEARCH_CAP)
}

pub fn find_counterexample_n_with_cap(
    t: u32,
    p: Probability,
    target: Probability,
    cap: u64,
) -> Result<(u64, BoundCertificate), BoundError> {
    if t < 2 {
        return Err(BoundError::InvalidT { t });
    }
    if !p.is_above_half() {
        return Err(BoundError::ProbabilityNotAboveHalf { p });
    }
    let target_f = target.as_f64();
    let mut cache = FailureCache::default();
    let exceeds = |n: u64, cache: &mut FailureCache| -> (bool, BoundCertificate) {
        let cert = build_certificate(t, n, p, cache);
        (cert.lower_bound > target_f, cert)
    };

    // Doubling phase.
    let mut lo = 0u64;
    let mut hi = 1u64;
    let mut hi_cert;
    loop {
        let (ok, cert) = exceeds(hi, &mut cache);
        if ok {
            hi_cert = cert;
            break;
        }
        if hi >= cap {
            return Err(BoundError::NotFoundWithinCap {
                cap,
                certificate: Box::new(cert),
            });
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    // Binary search for the first crossing in (lo, hi]; re-evaluate at every
    // step rather than interpolating.
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        let (ok, cert) = exceeds(mid, &mut cache);
        if ok {
            hi = mid;
            hi_cert = cert;
        } else {
            lo = mid;
        }
    }
    // Exhaustive scan below the crossing: certified bounds need not be
    // monotone in n, so take the smallest n that works.
    for n in 1..hi {
        let (ok, cert) = exceeds(n, &mut cache);
        if ok {
            return Ok((n, cert));
        }
    }
    Ok((hi, hi_cert))
}
