//! Re-verifies serialized certificates the way a third party would: parse
//! the text document, recompute every number from the listed rows plus
//! independent tail evaluations, and check the stated bound.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use kintersect::bounds::{binom_tail_le, binom_tail_le_ln, mu_lower_bound};
use kintersect::graph::pair_count;
use kintersect::prob::Probability;

struct ParsedCertificate {
    t: u32,
    n: u64,
    p: Probability,
    edge_pairs: u64,
    cond1_count_floor: u64,
    term_cond1: f64,
    term_cond1_ln: f64,
    /// (size, subsets, failure, failure_ln, product)
    rows: Vec<(u64, BigUint, f64, f64, f64)>,
    truncated: bool,
    lower_bound: f64,
}

fn parse_certificate(text: &str) -> ParsedCertificate {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("union-bound-certificate v1"));
    let mut field = |key: &str| -> String {
        let line = lines.next().unwrap_or_else(|| panic!("missing {key}"));
        let (k, v) = line
            .split_once(": ")
            .unwrap_or_else(|| panic!("bad line {line}"));
        assert_eq!(k, key, "unexpected field order");
        v.to_string()
    };
    let t: u32 = field("t").parse().unwrap();
    let n: u64 = field("n").parse().unwrap();
    let p: Probability = field("p").parse().unwrap();
    let edge_pairs: u64 = field("edge_pairs").parse().unwrap();
    let cond1_count_floor: u64 = field("cond1_count_floor").parse().unwrap();
    let term_cond1: f64 = field("term_cond1").parse().unwrap();
    let term_cond1_ln: f64 = field("term_cond1_ln").parse().unwrap();
    let n_terms: usize = field("subset_terms").parse().unwrap();
    assert_eq!(
        field("columns"),
        "size subsets per_subset_failure per_subset_failure_ln product"
    );
    let rest: Vec<&str> = lines.collect();
    let mut rows = Vec::with_capacity(n_terms);
    for line in &rest[..n_terms] {
        let payload = line.strip_prefix("term: ").expect("term row");
        let cols: Vec<&str> = payload.split(' ').collect();
        assert_eq!(cols.len(), 5, "term row shape: {line}");
        rows.push((
            cols[0].parse().unwrap(),
            cols[1].parse().unwrap(),
            cols[2].parse().unwrap(),
            cols[3].parse().unwrap(),
            cols[4].parse().unwrap(),
        ));
    }
    let truncated = rest[n_terms]
        .strip_prefix("truncated: ")
        .unwrap()
        .parse()
        .unwrap();
    let lower_bound = rest[n_terms + 1]
        .strip_prefix("lower_bound: ")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(rest.len(), n_terms + 2, "trailing data");
    ParsedCertificate {
        t,
        n,
        p,
        edge_pairs,
        cond1_count_floor,
        term_cond1,
        term_cond1_ln,
        rows,
        truncated,
        lower_bound,
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Natural log of a positive big integer, from its top 53 bits.
fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().ln();
    }
    let top = (x >> (bits - 53)).to_f64().unwrap();
    top.ln() + (bits - 53) as f64 * std::f64::consts::LN_2
}

/// Checks everything recomputable from the document plus independent
/// binomial tails.
fn reverify(cert: &ParsedCertificate) {
    assert_eq!(cert.edge_pairs, pair_count(cert.n), "edge pair count");

    if cert.t >= 3 && cert.n == 0 {
        // Degenerate zero-vertex family: empty by definition, whole failure
        // mass on the first term.
        assert_eq!(cert.term_cond1, 1.0);
        assert!(cert.rows.is_empty());
        assert_eq!(cert.lower_bound, 0.0);
        return;
    }

    // The condition-1 term is the independent tail below the stated count
    // floor (for the majority level the floor is the membership threshold
    // itself, so the same formula applies).
    if cert.t >= 3 {
        assert_eq!(
            cert.cond1_count_floor,
            cert.p.cond1_edge_floor(cert.edge_pairs),
            "condition-1 floor"
        );
    } else {
        assert_eq!(cert.cond1_count_floor, cert.edge_pairs / 2 + 1);
    }
    if cert.cond1_count_floor == 0 {
        assert_eq!(cert.term_cond1, 0.0);
        assert_eq!(cert.term_cond1_ln, f64::NEG_INFINITY);
    } else {
        let k = cert.cond1_count_floor - 1;
        assert_eq!(
            cert.term_cond1,
            binom_tail_le(cert.edge_pairs, cert.p, k).unwrap(),
            "condition-1 term"
        );
        let independent_ln = binom_tail_le_ln(cert.edge_pairs, cert.p, k).unwrap();
        assert!(
            (cert.term_cond1_ln - independent_ln).abs() <= 1e-9 * independent_ln.abs().max(1.0),
            "condition-1 log term: {} vs {independent_ln}",
            cert.term_cond1_ln
        );
    }

    if cert.t >= 3 {
        // Subset sizes are contiguous from the qualifying floor, reaching n
        // unless the table was truncated at the zero clamp.
        let s_min = cert.p.subset_size_floor(cert.n).max(1);
        for (i, row) in cert.rows.iter().enumerate() {
            assert_eq!(row.0, s_min + i as u64, "subset sizes not contiguous");
        }
        assert!(!cert.rows.is_empty());
        if !cert.truncated {
            assert_eq!(cert.rows.last().unwrap().0, cert.n);
        }
        let mut expect = binomial(cert.n, s_min);
        for row in &cert.rows {
            let (s, count, failure, failure_ln, product) = row;
            assert_eq!(count, &expect, "C({}, {s}) wrong", cert.n);
            assert!((0.0..=1.0).contains(failure), "failure outside [0,1]");
            assert!(*failure_ln <= f64::EPSILON, "log failure above ln 1");
            if *failure > 0.0 {
                // In-range failure: the value and its log agree, and the
                // product is the plain f64 product.
                assert!(
                    (failure.ln() - failure_ln).abs() <= 1e-9 * failure_ln.abs().max(1.0),
                    "failure/log mismatch at s={s}"
                );
                let count_f64 = count.to_f64().unwrap_or(f64::INFINITY);
                if count_f64.is_finite() {
                    assert_eq!(*product, count_f64 * failure, "product at s={s}");
                } else {
                    assert_eq!(*product, f64::INFINITY, "product at s={s}");
                }
            } else {
                // Failure mass below the f64 range: the log column carries
                // the magnitude and the product is log-routed with a
                // documented conservative slack.
                let ln_product = big_ln(count) + failure_ln;
                if *product == 0.0 {
                    assert!(
                        ln_product < -700.0 + 1e-9,
                        "dropped product too large at s={s}: ln {ln_product}"
                    );
                } else if product.is_infinite() {
                    assert!(ln_product > 700.0, "saturated product too small at s={s}");
                } else {
                    let err = product.ln() - ln_product;
                    assert!(
                        (0.0..=1e-3).contains(&err),
                        "log-routed product at s={s}: off by e^{err}"
                    );
                }
            }
            if row.0 < cert.n {
                expect = expect * (cert.n - row.0) / (row.0 + 1);
            }
        }
    } else {
        assert!(cert.rows.is_empty());
    }

    // The stated bound re-sums from the rows in listed order.
    let mut raw = 1.0 - cert.term_cond1;
    for row in &cert.rows {
        raw -= row.4;
    }
    assert_eq!(cert.lower_bound, raw.max(0.0), "bound does not re-sum");
}

#[test]
fn golden_certificate_reverifies_line_by_line() {
    let golden = include_str!("golden/counterexample_t3_p34.txt");
    let body = golden
        .strip_prefix("n_star: 118\n")
        .expect("golden carries the search result");
    let cert = parse_certificate(body);
    assert_eq!((cert.t, cert.n), (3, 118));
    assert!(!cert.truncated);
    assert!(cert.lower_bound > 0.421875);
    reverify(&cert);
}

#[test]
fn fresh_certificates_reverify_across_regimes() {
    let p34 = Probability::new(3, 4).unwrap();
    let p51 = Probability::new(51, 100).unwrap();
    for (t, n, p) in [
        (2u32, 0u64, p34),
        (2, 20, p34),
        (3, 0, p34),   // defined-empty base
        (3, 5, p34),   // clamped to zero, truncated table
        (3, 118, p34), // the first crossing
        (3, 140, p34),
        (3, 300, p34), // log-routed rows (counts overflow, failures underflow)
        (4, 60, p34),  // one more recursion level
        (2, 9, p51),
        (3, 200, p51), // slow-decay regime near p = 1/2
    ] {
        let cert = mu_lower_bound(t, n, p).unwrap();
        let parsed = parse_certificate(&cert.to_text());
        assert_eq!(parsed.lower_bound, cert.lower_bound);
        assert_eq!(parsed.truncated, cert.truncated);
        reverify(&parsed);
    }
}

/// The level-4 crossing sits near n = 2502; building that certificate from
/// a cold cache takes around a minute, so this runs on demand:
/// `cargo test --test certificate_reverify -- --ignored`.
#[test]
#[ignore]
fn level4_crossing_certificate_reverifies() {
    let p34 = Probability::new(3, 4).unwrap();
    let cert = mu_lower_bound(4, 2502, p34).unwrap();
    assert!(cert.lower_bound > 0.9, "bound {}", cert.lower_bound);
    let parsed = parse_certificate(&cert.to_text());
    assert_eq!(parsed.lower_bound, cert.lower_bound);
    reverify(&parsed);
}
