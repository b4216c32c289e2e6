//! Command-line interface to the kintersect toolkit.
//!
//! One subcommand per capability: membership queries, measure computation,
//! intersection verification, witness extraction, certified bounds, the
//! counterexample search, and threshold sweeps. Every randomized subcommand
//! requires an explicit `--seed` and reproduces its output bit-for-bit.
//!
//! Exit status: 0 on success, 1 when verification finds failures (or no
//! witness exists), 2 on usage or feasibility errors.

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use kintersect::bounds::{self, BoundCertificate, BoundError};
use kintersect::families::FamilyOracle;
use kintersect::graph::Graph;
use kintersect::measure::{self, ExactMode, MeasureEstimate};
use kintersect::prob::Probability;
use kintersect::verify::{self, MemberSource, VerifyMode};

/// Rejection-sampling attempts per member draw in `verify --mode sampled`.
const SAMPLED_MAX_DRAWS: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "kintersect",
    about = "Clique-intersecting graph families: membership, measures, certified bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads for parallel subcommands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a graph belongs to a family.
    Member(MemberArgs),
    /// Compute the p-biased measure of a family.
    Measure(MeasureArgs),
    /// Verify that member pairs intersect in the required clique.
    Verify(VerifyArgs),
    /// Extract an explicit clique witness from two members.
    Witness(WitnessArgs),
    /// Emit a certified lower bound on the recursive family's measure.
    Bound(BoundArgs),
    /// Find the smallest n whose certified bound exceeds a target.
    Counterexample(CounterexampleArgs),
    /// Measure sweep over a probability grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MemberArgs {
    /// Family spec: f2 | ft:t=3,p=3/4 | turan:t=2 | fixed:edges=0-1,1-2,0-2
    #[arg(long)]
    family: String,
    /// Graph in graph6 format.
    #[arg(long)]
    graph: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    #[value(name = "closed-form")]
    ClosedForm,
    Mc,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    family: String,
    /// Vertex count.
    #[arg(long)]
    n: usize,
    /// Probability as an exact rational (3/4) or finite decimal (0.75).
    #[arg(long)]
    p: Probability,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Sample count (mc only).
    #[arg(long)]
    samples: Option<u64>,
    /// Seed (mc only; required there).
    #[arg(long)]
    seed: Option<u64>,
    /// Force exact rational accumulation (exact: past the auto cutoff;
    /// closed-form: reject sizes beyond the exact tail cap).
    #[arg(long)]
    exact_rational: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    /// Clique size the intersections must contain.
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Member pairs to check (sampled mode).
    #[arg(long)]
    budget: Option<u64>,
    /// Seed (sampled mode).
    #[arg(long)]
    seed: Option<u64>,
    /// Edge probability for rejection sampling of members (sampled mode).
    #[arg(long)]
    p: Option<Probability>,
}

#[derive(Args)]
struct WitnessArgs {
    /// First member, graph6.
    #[arg(long)]
    g1: String,
    /// Second member, graph6.
    #[arg(long)]
    g2: String,
    /// Clique size to extract.
    #[arg(long)]
    t: u32,
    #[arg(long)]
    p: Probability,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    t: u32,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: Probability,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long)]
    t: u32,
    #[arg(long)]
    p: Probability,
    /// Measure target the certified bound must exceed (rational).
    #[arg(long)]
    target: Probability,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p_from: Probability,
    #[arg(long)]
    p_to: Probability,
    /// Number of grid points (>= 1; endpoints included).
    #[arg(long)]
    steps: u64,
    /// Samples per Monte-Carlo point (families without a closed form).
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Usage or feasibility failure: one-line diagnostic, exit 2.
struct CliError(String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(output) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &output.text) {
                        eprintln!("error: --out {path}: {e}");
                        return ExitCode::from(2);
                    }
                    println!("wrote {path}");
                }
                None => print!("{}", output.text),
            }
            ExitCode::from(u8::from(output.failures_found))
        }
        Err(CliError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

struct Output {
    text: String,
    failures_found: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self {
            text,
            failures_found: false,
        }
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Member(args) => run_member(args, cli.format),
        Command::Measure(args) => run_measure(args, cli.format),
        Command::Verify(args) => run_verify(args, cli.format),
        Command::Witness(args) => run_witness(args, cli.format),
        Command::Bound(args) => run_bound(args, cli.format),
        Command::Counterexample(args) => run_counterexample(args, cli.format),
        Command::Sweep(args) => run_sweep(args, cli.format),
    }
}

fn parse_family(spec: &str) -> Result<FamilyOracle, CliError> {
    FamilyOracle::from_str(spec).map_err(|e| CliError(format!("--family: {e}")))
}

fn require<T: Copy>(value: Option<T>, flag: &str, context: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError(format!("{flag} is required for {context}")))
}

fn run_member(args: &MemberArgs, format: Format) -> Result<Output, CliError> {
    let oracle = parse_family(&args.family)?;
    let graph = Graph::parse_graph6(&args.graph).map_err(|e| CliError(format!("--graph: {e}")))?;
    let member = oracle.is_member(&graph)?;
    let text = match format {
        Format::Plain => format!("{member}\n"),
        Format::Csv => format!(
            "family,n,graph,member\n{},{},{},{member}\n",
            args.family,
            graph.vertex_count(),
            args.graph
        ),
        Format::Jsonl => format!(
            "{}\n",
            json!({
                "family": args.family,
                "n": graph.vertex_count(),
                "graph": args.graph,
                "member": member,
            })
        ),
    };
    Ok(Output::ok(text))
}

fn estimate_csv_row(est: &MeasureEstimate) -> String {
    let seed = est
        .seed
        .map(|s| s.to_string())
        .unwrap_or_else(|| "-".to_string());
    format!(
        "{},{},{},{},{},{seed}",
        est.method,
        fmt17(est.value),
        fmt17(est.ci_low),
        fmt17(est.ci_high),
        est.samples
    )
}

fn estimate_json(est: &MeasureEstimate) -> serde_json::Value {
    json!({
        "method": est.method.to_string(),
        "value": est.value,
        "value_rational": est.exact.as_ref().map(|r| format!("{}/{}", r.numer(), r.denom())),
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "samples": est.samples,
        "seed": est.seed,
    })
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_measure(args: &MeasureArgs, format: Format) -> Result<Output, CliError> {
    let oracle = parse_family(&args.family)?;
    let estimate = match args.method {
        MethodArg::Exact => {
            let mode = if args.exact_rational {
                ExactMode::Rational
            } else {
                ExactMode::Auto
            };
            measure::mu_exact_with_mode(&oracle, args.n, args.p, mode)?
        }
        MethodArg::ClosedForm => {
            if oracle != FamilyOracle::Majority {
                return Err(CliError(
                    "--method closed-form is only available for --family f2".to_string(),
                ));
            }
            let est = measure::mu_closed_form_majority(args.n as u64, args.p);
            if args.exact_rational && est.exact.is_none() {
                return Err(CliError(format!(
                    "--exact-rational: C({},2) exceeds the exact tail cap of {}",
                    args.n,
                    bounds::EXACT_TAIL_CAP
                )));
            }
            est
        }
        MethodArg::Mc => {
            let samples = require(args.samples, "--samples", "--method mc")?;
            let seed = require(args.seed, "--seed", "--method mc")?;
            measure::mu_monte_carlo(&oracle, args.n, args.p, samples, seed)?
        }
    };
    let text = match format {
        Format::Plain => estimate.to_record_text(),
        Format::Csv => format!(
            "method,value,ci_low,ci_high,samples,seed\n{}\n",
            estimate_csv_row(&estimate)
        ),
        Format::Jsonl => format!("{}\n", estimate_json(&estimate)),
    };
    Ok(Output::ok(text))
}

fn run_verify(args: &VerifyArgs, format: Format) -> Result<Output, CliError> {
    let oracle = parse_family(&args.family)?;
    let mode = match args.mode {
        ModeArg::Exhaustive => VerifyMode::Exhaustive,
        ModeArg::Sampled => {
            let budget = require(args.budget, "--budget", "--mode sampled")?;
            let seed = require(args.seed, "--seed", "--mode sampled")?;
            let p = require(args.p, "--p", "--mode sampled (rejection sampling)")?;
            VerifyMode::Sampled {
                budget,
                seed,
                source: MemberSource::RejectionGnp {
                    p,
                    max_draws: SAMPLED_MAX_DRAWS,
                },
            }
        }
    };
    let report = verify::verify_intersecting(&oracle, args.n, args.t, mode)?;
    let failures_found = !report.passed();
    let text = match format {
        // Wall-clock noise is dropped so identical invocations emit
        // identical bytes.
        Format::Plain => report
            .to_text()
            .lines()
            .filter(|line| !line.starts_with("elapsed_ms:"))
            .map(|line| format!("{line}\n"))
            .collect(),
        Format::Csv => format!(
            "mode,members,pairs_checked,family_empty,failures\n{},{},{},{},{}\n",
            report.mode,
            report.members,
            report.pairs_checked,
            report.family_empty,
            report.failures.len()
        ),
        Format::Jsonl => format!(
            "{}\n",
            json!({
                "mode": report.mode.to_string(),
                "members": report.members,
                "pairs_checked": report.pairs_checked,
                "family_empty": report.family_empty,
                "failures": report.failures,
                "witness_sizes": report.witness_sizes,
            })
        ),
    };
    Ok(Output {
        text,
        failures_found,
    })
}

fn run_witness(args: &WitnessArgs, format: Format) -> Result<Output, CliError> {
    let g1 = Graph::parse_graph6(&args.g1).map_err(|e| CliError(format!("--g1: {e}")))?;
    let g2 = Graph::parse_graph6(&args.g2).map_err(|e| CliError(format!("--g2: {e}")))?;
    match verify::extract_witness(&g1, &g2, args.t, args.p) {
        Ok(witness) => {
            let vertices = witness.vertices.to_vec();
            let text = match format {
                Format::Plain => format!("t: {}\nvertices: {}\n", witness.t, witness.vertices),
                Format::Csv => format!(
                    "t,vertices\n{},{}\n",
                    witness.t,
                    vertices
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                ),
                Format::Jsonl => format!(
                    "{}\n",
                    json!({ "t": witness.t, "vertices": vertices, "found": true })
                ),
            };
            Ok(Output::ok(text))
        }
        Err(verify::VerifyError::WitnessNotFound) => {
            let text = match format {
                Format::Plain => "witness not found\n".to_string(),
                Format::Csv => "t,vertices\n-,-\n".to_string(),
                Format::Jsonl => format!("{}\n", json!({ "t": args.t, "found": false })),
            };
            Ok(Output {
                text,
                failures_found: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn certificate_json(cert: &BoundCertificate) -> serde_json::Value {
    json!({
        "t": cert.t,
        "n": cert.n,
        "p": cert.p.to_string(),
        "term_cond1": cert.term_cond1,
        "term_cond1_ln": cert.term_cond1_ln,
        "terms_cond2": cert.terms_cond2.iter().map(|term| json!({
            "size": term.subset_size,
            "subsets": term.subset_count.to_string(),
            "per_subset_failure": term.per_subset_failure,
            "per_subset_failure_ln": term.per_subset_failure_ln,
            "product": term.product,
        })).collect::<Vec<_>>(),
        "truncated": cert.truncated,
        "lower_bound": cert.lower_bound,
    })
}

fn certificate_csv(cert: &BoundCertificate) -> String {
    format!(
        "t,n,p,term_cond1,subset_terms,truncated,lower_bound\n{},{},{},{},{},{},{}\n",
        cert.t,
        cert.n,
        cert.p,
        fmt17(cert.term_cond1),
        cert.terms_cond2.len(),
        cert.truncated,
        fmt17(cert.lower_bound)
    )
}

fn run_bound(args: &BoundArgs, format: Format) -> Result<Output, CliError> {
    let cert = bounds::mu_lower_bound(args.t, args.n, args.p)?;
    let text = match format {
        Format::Plain => cert.to_text(),
        Format::Csv => certificate_csv(&cert),
        Format::Jsonl => format!("{}\n", certificate_json(&cert)),
    };
    Ok(Output::ok(text))
}

fn run_counterexample(args: &CounterexampleArgs, format: Format) -> Result<Output, CliError> {
    match bounds::find_counterexample_n(args.t, args.p, args.target) {
        Ok((n_star, cert)) => {
            let text = match format {
                Format::Plain => format!("n_star: {n_star}\n{}", cert.to_text()),
                Format::Csv => format!(
                    "t,p,target,n_star,lower_bound\n{},{},{},{n_star},{}\n",
                    args.t,
                    args.p,
                    args.target,
                    fmt17(cert.lower_bound)
                ),
                Format::Jsonl => format!(
                    "{}\n",
                    json!({
                        "t": args.t,
                        "p": args.p.to_string(),
                        "target": args.target.to_string(),
                        "n_star": n_star,
                        "certificate": certificate_json(&cert),
                    })
                ),
            };
            Ok(Output::ok(text))
        }
        Err(BoundError::NotFoundWithinCap { cap, certificate }) => Err(CliError(format!(
            "no n <= {cap} certifies a bound above {}; bound at the cap: {}",
            args.target, certificate.lower_bound
        ))),
        Err(e) => Err(e.into()),
    }
}

/// Exact rational grid: `steps` points from `from` to `to`, inclusive.
fn probability_grid(
    from: Probability,
    to: Probability,
    steps: u64,
) -> Result<Vec<Probability>, CliError> {
    if steps == 0 {
        return Err(CliError("--steps must be at least 1".to_string()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let (a, b) = (from.numer() as u128, from.denom() as u128);
    let (c, d) = (to.numer() as u128, to.denom() as u128);
    let k = (steps - 1) as u128;
    let mut grid = Vec::with_capacity(steps as usize);
    for i in 0..=k {
        // from * (k - i)/k + to * i/k over the common denominator b*d*k.
        let num = a * d * (k - i) + c * b * i;
        let den = b * d * k;
        let g = gcd_u128(num, den);
        let (num, den) = (num / g, den / g);
        if num > u64::MAX as u128 || den > u64::MAX as u128 {
            return Err(CliError(
                "grid endpoints too fine-grained for exact interpolation".to_string(),
            ));
        }
        grid.push(
            Probability::new(num as u64, den as u64)
                .map_err(|e| CliError(format!("grid point {i}: {e}")))?,
        );
    }
    Ok(grid)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn run_sweep(args: &SweepArgs, format: Format) -> Result<Output, CliError> {
    let oracle = parse_family(&args.family)?;
    let grid = probability_grid(args.p_from, args.p_to, args.steps)?;
    let (samples, seed) = if oracle == FamilyOracle::Majority {
        (args.samples.unwrap_or(0), args.seed.unwrap_or(0))
    } else {
        (
            require(args.samples, "--samples", "monte-carlo sweeps")?,
            require(args.seed, "--seed", "monte-carlo sweeps")?,
        )
    };
    let rows = verify::sharp_threshold_sweep(&oracle, args.n, &grid, samples, seed)?;
    let mut text = String::new();
    match format {
        Format::Plain => {
            for (p, est) in &rows {
                let _ = writeln!(
                    text,
                    "p={p} value={} ci=[{}, {}] method={}",
                    fmt17(est.value),
                    fmt17(est.ci_low),
                    fmt17(est.ci_high),
                    est.method
                );
            }
        }
        Format::Csv => {
            let _ = writeln!(text, "p,value,ci_low,ci_high,method,samples,seed");
            for (p, est) in &rows {
                let seed = est
                    .seed
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "-".to_string());
                let _ = writeln!(
                    text,
                    "{p},{},{},{},{},{},{seed}",
                    fmt17(est.value),
                    fmt17(est.ci_low),
                    fmt17(est.ci_high),
                    est.method,
                    est.samples
                );
            }
        }
        Format::Jsonl => {
            for (p, est) in &rows {
                let mut row = estimate_json(est);
                row["p"] = json!(p.to_string());
                let _ = writeln!(text, "{row}");
            }
        }
    }
    Ok(Output::ok(text))
}
