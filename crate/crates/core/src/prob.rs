//! Exact rational probabilities.
//!
//! Every threshold in the family constructions compares counts against
//! rational expressions in `p`. Those comparisons are done in exact integer
//! arithmetic, so `p` is stored as a reduced fraction rather than a float.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A probability strictly between 0 and 1, stored as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Probability {
    num: u64,
    den: u64,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProbabilityError {
    #[error("probability must lie strictly between 0 and 1, got {num}/{den}")]
    OutOfRange { num: u64, den: u64 },
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a probability (expected `a/b` or a finite decimal)")]
    Malformed(String),
    #[error("decimal {0:?} has too many digits for exact conversion")]
    TooPrecise(String),
}

const fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Probability {
    /// Builds `num/den`, reduced. Rejects values outside the open interval (0, 1).
    pub fn new(num: u64, den: u64) -> Result<Self, ProbabilityError> {
        if den == 0 {
            return Err(ProbabilityError::ZeroDenominator);
        }
        if num == 0 || num >= den {
            return Err(ProbabilityError::OutOfRange { num, den });
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 - p`, exact.
    pub fn complement(&self) -> Probability {
        Probability {
            num: self.den - self.num,
            den: self.den,
        }
    }

    /// True iff `p > 1/2`, exact.
    pub fn is_above_half(&self) -> bool {
        2 * self.num > self.den
    }

    /// Smallest integer `m` with `m >= ((p + 1/2) / 2) * pairs`.
    ///
    /// The edge-count floor for the recursive construction: a graph on a
    /// vertex set with `pairs` unordered pairs satisfies the density
    /// condition iff its edge count is at least this value. Exact: the count
    /// comparison `count >= ((p + 1/2)/2) * pairs` over the rationals is
    /// equivalent to `count >= cond1_edge_floor(pairs)` over the integers.
    pub fn cond1_edge_floor(&self, pairs: u64) -> u64 {
        // threshold = (2*num + den) * pairs / (4 * den)
        let a = (2 * self.num as u128 + self.den as u128) * pairs as u128;
        let b = 4 * self.den as u128;
        ceil_div(a, b) as u64
    }

    /// Smallest integer `s` with `s >= (p - 1/2) * (m - 1)`.
    ///
    /// The subset-size floor of the recursive construction's hereditary
    /// condition on a vertex set of size `m`. Requires `p > 1/2`; `m = 0`
    /// yields 0 (the degenerate ambient set).
    pub fn subset_size_floor(&self, m: u64) -> u64 {
        debug_assert!(self.is_above_half());
        if m == 0 {
            return 0;
        }
        // threshold = (2*num - den) * (m - 1) / (2 * den)
        let a = (2 * self.num as u128 - self.den as u128) * (m as u128 - 1);
        let b = 2 * self.den as u128;
        ceil_div(a, b) as u64
    }
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

impl PartialOrd for Probability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Probability {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Probability {
    type Err = ProbabilityError;

    /// Parses `a/b` or a finite decimal such as `0.75` (converted exactly).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: u64 = a
                .trim()
                .parse()
                .map_err(|_| ProbabilityError::Malformed(s.to_string()))?;
            let den: u64 = b
                .trim()
                .parse()
                .map_err(|_| ProbabilityError::Malformed(s.to_string()))?;
            return Probability::new(num, den);
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ProbabilityError::Malformed(s.to_string()));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(ProbabilityError::Malformed(s.to_string()));
        }
        // u64 holds 10^19 > 10^18, so up to 18 fractional digits convert exactly.
        if frac_part.len() > 18 {
            return Err(ProbabilityError::TooPrecise(s.to_string()));
        }
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| ProbabilityError::Malformed(s.to_string()))?
        };
        let den = 10u64.pow(frac_part.len() as u32);
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part
                .parse()
                .map_err(|_| ProbabilityError::Malformed(s.to_string()))?
        };
        let num = int_val
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| ProbabilityError::TooPrecise(s.to_string()))?;
        Probability::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_on_construction() {
        let p = Probability::new(75, 100).unwrap();
        assert_eq!((p.numer(), p.denom()), (3, 4));
    }

    #[test]
    fn rejects_endpoints_and_zero_denominator() {
        assert!(Probability::new(0, 5).is_err());
        assert!(Probability::new(5, 5).is_err());
        assert!(Probability::new(6, 5).is_err());
        assert!(Probability::new(1, 0).is_err());
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(
            "3/4".parse::<Probability>().unwrap(),
            Probability::new(3, 4).unwrap()
        );
        assert_eq!(
            "0.75".parse::<Probability>().unwrap(),
            Probability::new(3, 4).unwrap()
        );
        assert_eq!(
            "0.55".parse::<Probability>().unwrap(),
            Probability::new(11, 20).unwrap()
        );
        assert_eq!(
            ".5".parse::<Probability>().unwrap(),
            Probability::new(1, 2).unwrap()
        );
        assert!("".parse::<Probability>().is_err());
        assert!("x/y".parse::<Probability>().is_err());
        assert!("1.25".parse::<Probability>().is_err()); // out of range
        assert!("0.1234567890123456789".parse::<Probability>().is_err());
    }

    #[test]
    fn ordering_uses_cross_multiplication() {
        let a = Probability::new(1, 2).unwrap();
        let b = Probability::new(2, 3).unwrap();
        assert!(a < b);
        assert_eq!(
            "0.500".parse::<Probability>().unwrap().cmp(&a),
            Ordering::Equal
        );
    }

    #[test]
    fn above_half_is_strict() {
        assert!(!Probability::new(1, 2).unwrap().is_above_half());
        assert!(Probability::new(501, 1000).unwrap().is_above_half());
    }

    #[test]
    fn cond1_floor_matches_rational_comparison() {
        // p = 3/4, 45 pairs: threshold (5/8)*45 = 28.125 so the floor is 29.
        let p = Probability::new(3, 4).unwrap();
        assert_eq!(p.cond1_edge_floor(45), 29);
        // p = 3/4, 28 pairs: (5/8)*28 = 17.5 -> 18.
        assert_eq!(p.cond1_edge_floor(28), 18);
        // Exact-integer threshold stays non-strict: (5/8)*8 = 5.
        assert_eq!(p.cond1_edge_floor(8), 5);
        assert_eq!(p.cond1_edge_floor(0), 0);
    }

    #[test]
    fn subset_floor_matches_rational_comparison() {
        // p = 3/4: threshold (1/4)(m-1).
        let p = Probability::new(3, 4).unwrap();
        assert_eq!(p.subset_size_floor(10), 3); // 9/4 = 2.25 -> 3
        assert_eq!(p.subset_size_floor(9), 2); // 8/4 = 2 exactly
        assert_eq!(p.subset_size_floor(5), 1); // 4/4 = 1 exactly
        assert_eq!(p.subset_size_floor(1), 0);
        assert_eq!(p.subset_size_floor(0), 0);
    }

    #[test]
    fn complement_is_exact() {
        let p = Probability::new(3, 4).unwrap();
        assert_eq!(p.complement(), Probability::new(1, 4).unwrap());
    }
}
