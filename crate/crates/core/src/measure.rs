//! Biased-measure computation: exact enumeration, the closed form for the
//! majority family, and seeded parallel Monte Carlo.
//!
//! The p-biased measure of a family on `n` vertices is the probability that
//! a random graph G(n, p) belongs to it; equivalently the sum of
//! `p^(edges) (1-p)^(C(n,2)-edges)` over all member graphs.

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{self, big_ratio_to_f64, fmt_f64, BigRational};
use crate::families::{FamilyError, FamilyOracle, MembershipContext};
use crate::graph::{self, pair_count, Graph};
use crate::prob::Probability;
use crate::rng::substream_seed;

/// Largest `C(n,2)` for which exact enumeration accumulates in rational
/// arithmetic by default; beyond it (up to the enumeration cap) the sum is
/// compensated floating point.
pub const RATIONAL_ACCUMULATION_CAP_BITS: u64 = 21;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("monte-carlo estimation needs at least one sample")]
    ZeroSamples,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMethod {
    ExactEnumeration,
    ClosedForm,
    MonteCarlo,
}

impl std::fmt::Display for MeasureMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let label = match self {
            MeasureMethod::ExactEnumeration => "exact-enumeration",
            MeasureMethod::ClosedForm => "closed-form",
            MeasureMethod::MonteCarlo => "monte-carlo",
        };
        f.write_str(label)
    }
}

/// Accumulation mode for [`mu_exact_with_mode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMode {
    /// Rational when `C(n,2) <=` [`RATIONAL_ACCUMULATION_CAP_BITS`], float otherwise.
    Auto,
    /// Force exact rational accumulation.
    Rational,
    /// Force compensated floating accumulation.
    Float,
}

/// A measure value with its provenance.
///
/// Exact methods carry a zero-width interval (and, in rational mode, the
/// exact value); Monte Carlo carries a Wilson 95% interval. Identical
/// inputs (oracle, n, p, samples, seed) produce bit-identical estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub method: MeasureMethod,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// 0 for exact methods.
    pub samples: u64,
    /// Absent for exact methods.
    pub seed: Option<u64>,
    /// Exact rational value, when the method produced one.
    pub exact: Option<BigRational>,
}

impl MeasureEstimate {
    fn exact_valued(method: MeasureMethod, value: f64, exact: Option<BigRational>) -> Self {
        Self {
            method,
            value,
            ci_low: value,
            ci_high: value,
            samples: 0,
            seed: None,
            exact,
        }
    }

    /// Flat text record: one `key value` line per field, probabilities as
    /// rational (`-` when unavailable) plus 17-significant-digit decimal.
    pub fn to_record_text(&self) -> String {
        use std::fmt::Write;
        let rational = match &self.exact {
            Some(r) => format!("{}/{}", r.numer(), r.denom()),
            None => "-".to_string(),
        };
        let mut out = String::new();
        let _ = writeln!(out, "method {}", self.method);
        let _ = writeln!(out, "value {} {}", rational, fmt_f64(self.value));
        let ci_rational = if self.ci_low == self.value && self.ci_high == self.value {
            rational
        } else {
            "-".to_string()
        };
        let _ = writeln!(out, "ci_low {} {}", ci_rational, fmt_f64(self.ci_low));
        let _ = writeln!(out, "ci_high {} {}", ci_rational, fmt_f64(self.ci_high));
        let _ = writeln!(out, "samples {}", self.samples);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(out, "seed {seed}");
            }
            None => {
                let _ = writeln!(out, "seed -");
            }
        }
        out
    }
}

/// Exact measure by full enumeration of all `2^C(n,2)` graphs.
pub fn mu_exact(
    oracle: &FamilyOracle,
    n: usize,
    p: Probability,
) -> Result<MeasureEstimate, MeasureError> {
    mu_exact_with_mode(oracle, n, p, ExactMode::Auto)
}

pub fn mu_exact_with_mode(
    oracle: &FamilyOracle,
    n: usize,
    p: Probability,
    mode: ExactMode,
) -> Result<MeasureEstimate, MeasureError> {
    let bits = pair_count(n as u64);
    if bits > crate::families::ENUMERATION_CAP_BITS {
        return Err(FamilyError::EnumerationCapExceeded {
            n,
            bits,
            cap: crate::families::ENUMERATION_CAP_BITS,
        }
        .into());
    }
    oracle.validate_feasible(n)?;

    // Histogram of member edge counts: graphs with equal edge count have
    // equal weight, so the measure is a function of the histogram alone.
    // Enumeration walks edge subsets in Gray-code order (one edge flip per
    // step) with a reused membership context.
    let mut hist = vec![0u64; bits as usize + 1];
    let mut ctx = MembershipContext::new();
    graph::for_each_graph_gray(n, |g, edges| {
        if oracle.eval_validated(g, &mut ctx) {
            hist[edges as usize] += 1;
        }
    });

    let rational = match mode {
        ExactMode::Auto => bits <= RATIONAL_ACCUMULATION_CAP_BITS,
        ExactMode::Rational => true,
        ExactMode::Float => false,
    };
    if rational {
        let exact = measure_from_histogram_exact(&hist, p);
        let value = big_ratio_to_f64(exact.numer().magnitude(), exact.denom().magnitude());
        Ok(MeasureEstimate::exact_valued(
            MeasureMethod::ExactEnumeration,
            value,
            Some(exact),
        ))
    } else {
        let value = measure_from_histogram_float(&hist, p);
        Ok(MeasureEstimate::exact_valued(
            MeasureMethod::ExactEnumeration,
            value,
            None,
        ))
    }
}

/// Sum of `hist[k] * num^k * rest^(bits-k) / den^bits` over k, exact.
fn measure_from_histogram_exact(hist: &[u64], p: Probability) -> BigRational {
    let bits = hist.len() - 1;
    let num = BigUint::from(p.numer());
    let rest = BigUint::from(p.denom() - p.numer());
    let mut weight = rest.pow(bits as u32); // k = 0
    let mut total = BigUint::ZERO;
    for (k, &count) in hist.iter().enumerate() {
        if count > 0 {
            total += &weight * count;
        }
        if k < bits {
            weight = weight * &num / &rest;
        }
    }
    Ratio::new(
        BigInt::from(total),
        BigInt::from(BigUint::from(p.denom()).pow(bits as u32)),
    )
}

/// Kahan-compensated float version for edge spaces past the rational cap.
fn measure_from_histogram_float(hist: &[u64], p: Probability) -> f64 {
    let bits = (hist.len() - 1) as f64;
    let ln_p = (p.numer() as f64).ln() - (p.denom() as f64).ln();
    let ln_q = ((p.denom() - p.numer()) as f64).ln() - (p.denom() as f64).ln();
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for (k, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let term = count as f64 * (k as f64 * ln_p + (bits - k as f64) * ln_q).exp();
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum.clamp(0.0, 1.0)
}

/// Exact measure of the majority family via the binomial tail:
/// `Pr[Bin(C(n,2), p) > C(n,2)/2]`. No cap on `n` (pure arithmetic); the
/// rational value is attached while `C(n,2)` stays within the exact-tail cap.
pub fn mu_closed_form_majority(n: u64, p: Probability) -> MeasureEstimate {
    let pairs = pair_count(n);
    let k = pairs / 2;
    if pairs <= bounds::EXACT_TAIL_CAP {
        let tail = bounds::binom_tail_le_exact(pairs, p, k).expect("k <= pairs by construction");
        let exact = BigRational::from(BigInt::from(1)) - tail;
        let value = big_ratio_to_f64(exact.numer().magnitude(), exact.denom().magnitude());
        MeasureEstimate::exact_valued(MeasureMethod::ClosedForm, value, Some(exact))
    } else {
        let tail = bounds::binom_tail_le_log(pairs, p, k).expect("k <= pairs by construction");
        MeasureEstimate::exact_valued(MeasureMethod::ClosedForm, (1.0 - tail).max(0.0), None)
    }
}

/// Monte-Carlo measure estimate from `samples` independent G(n, p) draws.
///
/// Sample `i` uses its own generator seeded with
/// [`substream_seed`]`(seed, i)`, so the result is independent of worker
/// count and scheduling; hits are reduced by exact integer summation. The
/// interval is Wilson 95%.
pub fn mu_monte_carlo(
    oracle: &FamilyOracle,
    n: usize,
    p: Probability,
    samples: u64,
    seed: u64,
) -> Result<MeasureEstimate, MeasureError> {
    if samples == 0 {
        return Err(MeasureError::ZeroSamples);
    }
    oracle.validate_feasible(n)?;
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map_init(MembershipContext::new, |ctx, i| {
            let g =
                Graph::sample_gnp(n, p, substream_seed(seed, i)).expect("vertex count validated");
            u64::from(oracle.eval_validated(&g, ctx))
        })
        .sum();
    let value = hits as f64 / samples as f64;
    let (ci_low, ci_high) = wilson_95(hits, samples);
    Ok(MeasureEstimate {
        method: MeasureMethod::MonteCarlo,
        value,
        ci_low,
        ci_high,
        samples,
        seed: Some(seed),
        exact: None,
    })
}

/// Wilson 95% score interval for `hits` successes out of `n` trials.
pub(crate) fn wilson_95(hits: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let nf = n as f64;
    let phat = hits as f64 / nf;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = Z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(num: u64, den: u64) -> Probability {
        Probability::new(num, den).unwrap()
    }

    fn rational(num: u64, den: u64) -> BigRational {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn triangle_oracle() -> FamilyOracle {
        FamilyOracle::fixed_copy(vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn fixed_triangle_measure_is_p_cubed() {
        // Membership is three independent edge events.
        for (num, den) in [(1u64, 2u64), (3, 5), (3, 4)] {
            let est = mu_exact(&triangle_oracle(), 5, p(num, den)).unwrap();
            let expect = rational(num.pow(3), den.pow(3));
            assert_eq!(est.exact.as_ref().unwrap(), &expect);
            assert_eq!(est.ci_low, est.value);
            assert_eq!(est.ci_high, est.value);
        }
        // p = 1/2: exactly 1/8, the uniform count of members over 2^10.
        let est = mu_exact(&triangle_oracle(), 5, p(1, 2)).unwrap();
        assert_eq!(est.exact.unwrap(), rational(1, 8));
    }

    #[test]
    fn majority_n3_measure() {
        // Pr[Bin(3, 3/5) >= 2] = 81/125 = 0.648.
        let est = mu_exact(&FamilyOracle::Majority, 3, p(3, 5)).unwrap();
        assert_eq!(est.exact.as_ref().unwrap(), &rational(81, 125));
        assert_eq!(est.value, 0.648);
        let closed = mu_closed_form_majority(3, p(3, 5));
        assert_eq!(closed.exact.as_ref().unwrap(), &rational(81, 125));
    }

    #[test]
    fn uniform_measure_counts_members() {
        // At p = 1/2 the measure is (number of members) / 2^C(n,2).
        let est = mu_exact(&FamilyOracle::Majority, 4, p(1, 2)).unwrap();
        assert_eq!(est.exact.unwrap(), rational(22, 64));
    }

    #[test]
    fn exact_enumeration_matches_closed_form_for_majority() {
        // Including the degenerate n in {0, 1}, where the family is empty.
        for n in 0..=6usize {
            for (num, den) in [(11u64, 20u64), (3, 5), (3, 4)] {
                let by_enum = mu_exact(&FamilyOracle::Majority, n, p(num, den)).unwrap();
                let by_tail = mu_closed_form_majority(n as u64, p(num, den));
                assert_eq!(
                    by_enum.exact.unwrap(),
                    by_tail.exact.unwrap(),
                    "n={n} p={num}/{den}"
                );
            }
        }
    }

    #[test]
    fn fixed_copy_measure_is_p_to_the_edge_count_at_n6() {
        // A two-edge pattern on 6 vertices: measure is exactly p^2.
        let path = FamilyOracle::fixed_copy(vec![(1, 4), (4, 5)]).unwrap();
        for (num, den) in [(1u64, 2u64), (3, 4)] {
            let est = mu_exact(&path, 6, p(num, den)).unwrap();
            assert_eq!(est.exact.unwrap(), rational(num * num, den * den));
        }
    }

    #[test]
    fn closed_form_degenerate_and_large() {
        assert_eq!(mu_closed_form_majority(0, p(3, 5)).value, 0.0);
        assert_eq!(mu_closed_form_majority(1, p(3, 5)).value, 0.0);
        // Past the exact-tail cap: C(70,2) = 2415 uses the log path.
        let big = mu_closed_form_majority(70, p(11, 20));
        assert!(big.exact.is_none());
        assert!(big.value > 0.99);
    }

    #[test]
    fn float_mode_tracks_rational_mode() {
        let oracle = FamilyOracle::Majority;
        for (num, den) in [(11u64, 20u64), (3, 4)] {
            let a = mu_exact_with_mode(&oracle, 6, p(num, den), ExactMode::Rational).unwrap();
            let b = mu_exact_with_mode(&oracle, 6, p(num, den), ExactMode::Float).unwrap();
            assert!(b.exact.is_none());
            assert!(((a.value - b.value) / a.value).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_calibrated() {
        let oracle = triangle_oracle();
        let est1 = mu_monte_carlo(&oracle, 5, p(1, 2), 100_000, 7).unwrap();
        let est2 = mu_monte_carlo(&oracle, 5, p(1, 2), 100_000, 7).unwrap();
        assert_eq!(est1, est2);
        // Within 4 standard errors of 1/8.
        let se = (0.125f64 * 0.875 / 100_000.0).sqrt();
        assert!(
            (est1.value - 0.125).abs() < 4.0 * se,
            "value {}",
            est1.value
        );
        assert!(est1.ci_low <= est1.value && est1.value <= est1.ci_high);
        let est3 = mu_monte_carlo(&oracle, 5, p(1, 2), 100_000, 8).unwrap();
        assert_ne!(est1.value, est3.value);
    }

    #[test]
    fn monte_carlo_single_sample() {
        let est = mu_monte_carlo(&FamilyOracle::Majority, 4, p(3, 5), 1, 3).unwrap();
        assert!(est.value == 0.0 || est.value == 1.0);
        assert!(est.ci_low <= est.value && est.value <= est.ci_high);
        assert!(est.ci_high - est.ci_low > 0.5); // one trial says very little
        assert!(matches!(
            mu_monte_carlo(&FamilyOracle::Majority, 4, p(3, 5), 0, 3),
            Err(MeasureError::ZeroSamples)
        ));
    }

    #[test]
    fn monte_carlo_ci_contains_closed_form() {
        let est = mu_monte_carlo(&FamilyOracle::Majority, 6, p(3, 5), 100_000, 11).unwrap();
        let truth = mu_closed_form_majority(6, p(3, 5)).value;
        assert!(
            est.ci_low <= truth && truth <= est.ci_high,
            "CI [{}, {}] misses {}",
            est.ci_low,
            est.ci_high,
            truth
        );
    }

    #[test]
    fn measure_is_monotone_in_p_for_majority() {
        let grid = [(11u64, 20u64), (3, 5), (13, 20), (7, 10), (3, 4)];
        let mut prev = 0.0;
        for (num, den) in grid {
            let v = mu_closed_form_majority(12, p(num, den)).value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn record_text_shape() {
        let est = mu_exact(&FamilyOracle::Majority, 3, p(3, 5)).unwrap();
        let text = est.to_record_text();
        assert!(text.contains("method exact-enumeration"));
        assert!(text.contains("value 81/125 6.48"));
        assert!(text.contains("samples 0"));
        assert!(text.contains("seed -"));
        let mc = mu_monte_carlo(&FamilyOracle::Majority, 4, p(3, 5), 10, 5).unwrap();
        let text = mc.to_record_text();
        assert!(text.contains("method monte-carlo"));
        assert!(text.contains("seed 5"));
    }
}
