//! Command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 for unreadable input or invalid arguments, 3 when an enumeration would
//! exceed the cell budget. Numbers are written with 12 significant digits;
//! infinities are written as the string `"inf"`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::code::{
    generate_random_code, induced_marginal, input_axis, output_axis, CodeError, DecoderKind, ExperimentCell,
    ExperimentConfig, DEFAULT_BUDGET_CELLS,
};
use crate::converse::{build_tilted_sequence, ConverseError, TiltedSequence};
use crate::fixtures;
use crate::network::schema::{parse_network, SchemaError};
use crate::network::{enumerate_cuts, Cut, NetworkError, NetworkSpec};
use crate::prob::ProbError;
use crate::regions::{
    link_capacities, membership_report, rprime_bounds, LinkCapacities, MembershipOptions, Region, RegionError,
    RegionReport,
};
use crate::suites::{
    certificate_suite, simulation_suite, link_bound_suite, markov_suite, fano_suite, continuity_suite, renyi_suite,
    CodeFamily, SuiteOutcome,
};

/// Environment variable holding the default cell budget.
pub const BUDGET_ENV: &str = "MMNET_BUDGET_CELLS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Link capacities and the per-cut sums of crossing capacities.
    Capacity,
    /// Membership of a rate tuple in a region.
    Region,
    /// Randomized verification suites.
    Verify,
    /// Tilted per-letter laws of a random code.
    Tilt,
    /// Error of the best of several random codes over rates and blocklengths.
    Simulate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionName {
    Out,
    OutStar,
    /// Inner region at the uniform input.
    In,
    /// Cut-set region at the uniform input.
    CutSet,
    Prime,
}

#[derive(Debug, Parser)]
#[command(name = "mmnet", version, about = "Cut-set regions, converse certificates and code simulation for small networks")]
pub struct Args {
    /// Network JSON file.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub network: Option<PathBuf>,
    /// Bundled network instead of a file: bsc2, bec2, line3, line3_feedback, erasure_relay3.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Rényi orders.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Per-node rates for `region`; source rates for the other commands.
    #[arg(long, value_delimiter = ',')]
    pub rates: Vec<f64>,
    /// Cut bitmasks (bit 0 is node 1).
    #[arg(long, value_delimiter = ',')]
    pub cuts: Vec<u32>,
    /// Blocklength (`tilt`) or largest blocklength (`verify`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo trials (`simulate`) or random draws per suite (`verify`).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Largest tensor or trajectory count enumerated exactly.
    #[arg(long)]
    pub budget_cells: Option<usize>,
    #[arg(long, value_enum, default_value = "out")]
    pub region: RegionName,
    /// Blocklengths for `simulate`.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Vec<usize>,
    /// Number of consecutive code seeds starting at `--seed`.
    #[arg(long)]
    pub seed_count: Option<u64>,
    /// Record runtimes (in the CSV and on standard error).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Library(String),
    #[error("{count} check(s) failed")]
    CheckFailed { count: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed { .. } => 1,
            CliError::Budget(_) => 3,
            _ => 2,
        }
    }
}

fn code_budget(e: &CodeError) -> bool {
    matches!(e, CodeError::BudgetExhausted { .. } | CodeError::Prob(ProbError::TooLarge { .. }))
}

macro_rules! library_error {
    ($($t:ty => $budget:expr),* $(,)?) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                let is_budget: fn(&$t) -> bool = $budget;
                if is_budget(&e) { CliError::Budget(e.to_string()) } else { CliError::Library(e.to_string()) }
            }
        }
    )*};
}

library_error! {
    CodeError => code_budget,
    ConverseError => |e| match e {
        ConverseError::BudgetExhausted { .. } | ConverseError::Prob(ProbError::TooLarge { .. }) => true,
        ConverseError::Code(c) => code_budget(c),
        _ => false,
    },
    NetworkError => |e| matches!(e, NetworkError::Prob(ProbError::TooLarge { .. })),
    ProbError => |e| matches!(e, ProbError::TooLarge { .. }),
    RegionError => |e| matches!(e, RegionError::Prob(ProbError::TooLarge { .. })),
}

/// serde_json formatter writing floats with 12 significant digits. Fields
/// that can be infinite serialize through `crate::nonfinite`.
struct Digits12;

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else {
        let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
        if (1e-4..1e15).contains(&rounded.abs()) {
            format!("{rounded}")
        } else {
            format!("{rounded:e}")
        }
    }
}

impl serde_json::ser::Formatter for Digits12 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_number(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits12);
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn budget(args: &Args) -> Result<usize, CliError> {
    if let Some(b) = args.budget_cells {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{BUDGET_ENV}={v} is not a cell count"))),
        Err(_) => Ok(DEFAULT_BUDGET_CELLS),
    }
}

fn load_network(args: &Args) -> Result<NetworkSpec, CliError> {
    if let Some(name) = &args.fixture {
        return fixtures::load(name).ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}`")));
    }
    let path = args.network.as_ref().expect("clap requires --network or --fixture");
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(parse_network(&text)?)
}

fn cuts(args: &Args, spec: &NetworkSpec) -> Result<Vec<Cut>, CliError> {
    if args.cuts.is_empty() {
        return Ok(enumerate_cuts(spec));
    }
    args.cuts
        .iter()
        .map(|&b| {
            let cut = Cut::from_bitmask(b);
            spec.check_cut(cut)?;
            Ok(cut)
        })
        .collect()
}

fn check_lambdas(lambdas: &[f64]) -> Result<(), CliError> {
    match lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
        Some(l) => Err(CliError::Usage(format!("order {l} is not a finite number >= 1"))),
        None => Ok(()),
    }
}

/// Source rates for code-based commands: one value for every source.
fn source_rates(args: &Args, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let rates = if args.rates.is_empty() { default.to_vec() } else { args.rates.clone() };
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(CliError::Usage(format!("rate {r} is not a finite nonnegative number")));
    }
    Ok(rates)
}

fn seeds(args: &Args, default_count: u64) -> Vec<u64> {
    let count = args.seed_count.unwrap_or(default_count);
    (args.seed..args.seed + count).collect()
}

#[derive(Serialize)]
struct LinkRow {
    from: usize,
    to: usize,
    capacity_bits: f64,
    input: Vec<f64>,
}

#[derive(Serialize)]
struct CutRow {
    cut_bitmask: u32,
    bound_bits: f64,
}

#[derive(Serialize)]
struct CapacityOutput {
    links: Vec<LinkRow>,
    cuts: Vec<CutRow>,
}

fn capacity(args: &Args, spec: &NetworkSpec, format: Format) -> Result<String, CliError> {
    let caps: LinkCapacities = link_capacities(spec)?;
    let bounds = rprime_bounds(&caps, spec, &cuts(args, spec)?)?;
    let out = CapacityOutput {
        links: caps
            .links
            .iter()
            .map(|l| LinkRow { from: l.from + 1, to: l.to + 1, capacity_bits: l.capacity, input: l.input.clone() })
            .collect(),
        cuts: bounds.iter().map(|b| CutRow { cut_bitmask: b.cut.bitmask(), bound_bits: b.value }).collect(),
    };
    Ok(match format {
        Format::Json => to_json(&out),
        Format::Csv => csv_text(
            &["cut_bitmask", "bound_bits"],
            &out.cuts.iter().map(|c| vec![c.cut_bitmask.to_string(), format_number(c.bound_bits)]).collect::<Vec<_>>(),
        ),
    })
}

fn region(args: &Args, spec: &NetworkSpec, format: Format) -> Result<String, CliError> {
    if args.rates.is_empty() {
        return Err(CliError::Usage("`region` needs --rates with one rate per node".into()));
    }
    let region = match args.region {
        RegionName::Out => Region::Out,
        RegionName::OutStar => Region::OutStar,
        RegionName::In => Region::In(spec.uniform_input()),
        RegionName::CutSet => Region::CutSet(spec.uniform_input()),
        RegionName::Prime => Region::Prime,
    };
    let mut opts = MembershipOptions::default();
    opts.optimizer.seed = args.seed;
    let report: RegionReport = membership_report(spec, &args.rates, &region, &opts)?;
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => csv_text(
            &["cut_bitmask", "bound_bits", "penalty_bits", "slack_bits", "verdict"],
            &report
                .cuts
                .iter()
                .map(|c| {
                    vec![
                        c.cut_bitmask.to_string(),
                        format_number(c.bound_bits),
                        format_number(c.penalty_bits),
                        format_number(c.slack_bits),
                        serde_json::to_value(c.verdict).expect("verdict").as_str().unwrap_or_default().to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct VerifyOutput {
    suites: Vec<SuiteOutcome>,
    checks: usize,
    failures: usize,
    passed: bool,
}

fn verify(args: &Args, spec: &NetworkSpec, budget: usize) -> Result<(String, usize), CliError> {
    let draws = args.trials.unwrap_or(1000) as usize;
    let lambdas = if args.lambda.is_empty() { vec![1.0, 1.1, 2.0] } else { args.lambda.clone() };
    check_lambdas(&lambdas)?;
    let n = args.n.unwrap_or(2);
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let mut suites = vec![
        renyi_suite(args.seed, draws)?,
        fano_suite(args.seed, draws)?,
        continuity_suite(args.seed, draws.div_ceil(2))?,
        markov_suite(args.seed, draws.div_ceil(5))?,
    ];
    for rate in source_rates(args, &[0.5, 1.0])? {
        let family = CodeFamily { rate, blocklengths: (1..=n).collect(), seeds: seeds(args, 3), budget };
        suites.push(simulation_suite(spec, &family, &lambdas)?);
        suites.push(certificate_suite(spec, &family, &lambdas)?);
    }
    if spec.links().is_some() {
        suites.push(link_bound_suite(spec, args.seed, draws.div_ceil(5))?);
    }
    let failures = suites.iter().map(|s| s.failed).sum();
    let out = VerifyOutput { checks: suites.iter().map(|s| s.checks).sum(), failures, passed: failures == 0, suites };
    for s in &out.suites {
        for f in &s.failures {
            eprintln!("{}: {f}", s.name);
        }
    }
    Ok((to_json(&out), failures))
}

fn tilt(args: &Args, spec: &NetworkSpec, budget: usize) -> Result<String, CliError> {
    let lambdas = if args.lambda.is_empty() { vec![2.0] } else { args.lambda.clone() };
    check_lambdas(&lambdas)?;
    let rate = *source_rates(args, &[0.5])?.first().expect("nonempty");
    let n = args.n.unwrap_or(2);
    let rates: Vec<f64> = (0..spec.node_count()).map(|i| if spec.is_source(i) { rate } else { 0.0 }).collect();
    let code = generate_random_code(spec, &rates, n, args.seed, DecoderKind::Ml)?;
    let mut out: Vec<TiltedSequence> = Vec::new();
    for cut in cuts(args, spec)? {
        let tc = cut.complement(spec.node_count());
        let mut keep = Vec::new();
        for k in 0..n {
            keep.extend((0..spec.node_count()).map(|i| input_axis(i, k)));
            keep.extend(tc.iter().map(|&j| output_axis(j, k)));
        }
        let induced = induced_marginal(spec, &code, &keep, budget)?;
        for &lambda in &lambdas {
            out.push(build_tilted_sequence(spec, &induced, cut, lambda, n, budget)?);
        }
    }
    Ok(to_json(&out))
}

const EXPERIMENT_COLUMNS: [&str; 7] = ["rate_bits", "n", "method", "error", "ci_half_width", "seed", "cell_runtime_ms"];

fn simulate(args: &Args, spec: &NetworkSpec, budget: usize, format: Format) -> Result<String, CliError> {
    let cfg = ExperimentConfig {
        rates: source_rates(args, &[0.25, 0.75])?,
        blocklengths: if args.n_grid.is_empty() { vec![4, 8, 12] } else { args.n_grid.clone() },
        seeds: seeds(args, 32),
        trials: args.trials.unwrap_or(10_000),
        budget_cells: budget,
    };
    let mut cells: Vec<ExperimentCell> = crate::code::phase_transition_experiment(spec, &cfg);
    for c in &mut cells {
        if args.timings {
            eprintln!("cell rate={} n={}: {:.1} ms", c.rate_bits, c.n, c.cell_runtime_ms);
        }
        if let Some(reason) = &c.skipped {
            eprintln!("cell rate={} n={} skipped: {reason}", c.rate_bits, c.n);
        }
    }
    if !args.timings {
        cells.iter_mut().for_each(|c| c.cell_runtime_ms = 0.0);
    }
    Ok(match format {
        Format::Json => to_json(&cells),
        Format::Csv => {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        format_number(c.rate_bits),
                        c.n.to_string(),
                        c.method.as_str().to_string(),
                        opt(c.error.map(format_number)),
                        format_number(c.ci_half_width),
                        opt(c.seed.map(|s| s.to_string())),
                        if args.timings { format_number(c.cell_runtime_ms) } else { String::new() },
                    ]
                })
                .collect();
            csv_text(&EXPERIMENT_COLUMNS, &rows)
        }
    })
}

/// Runs one command and writes its artifact. Returns the error that
/// determines the exit status, if any.
pub fn run(args: &Args) -> Result<(), CliError> {
    let start = Instant::now();
    let spec = load_network(args)?;
    let budget = budget(args)?;
    let default_format = if args.command == Command::Simulate { Format::Csv } else { Format::Json };
    let format = args.format.unwrap_or(default_format);
    if format == Format::Csv && matches!(args.command, Command::Verify | Command::Tilt) {
        return Err(CliError::Usage("this command only writes json".into()));
    }
    let mut failed = 0;
    let text = match args.command {
        Command::Capacity => capacity(args, &spec, format)?,
        Command::Region => region(args, &spec, format)?,
        Command::Verify => {
            let (text, failures) = verify(args, &spec, budget)?;
            failed = failures;
            text
        }
        Command::Tilt => tilt(args, &spec, budget)?,
        Command::Simulate => simulate(args, &spec, budget, format)?,
    };
    match &args.out {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source })?,
    }
    if args.timings {
        eprintln!("total: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    }
    if failed > 0 {
        return Err(CliError::CheckFailed { count: failed });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_digits() {
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(0.531004406410719), "0.531004406411");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(-1.416510900551e-18), "-1.41651090055e-18");
        assert_eq!(to_json(&vec![1e-9, 0.1]), "[1e-9,0.1]\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::CheckFailed { count: 1 }.exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let budget: CliError = CodeError::BudgetExhausted { cells: 10, budget: 1 }.into();
        assert_eq!(budget.exit_code(), 3);
        let nested: CliError = ConverseError::Code(CodeError::BudgetExhausted { cells: 10, budget: 1 }).into();
        assert_eq!(nested.exit_code(), 3);
    }
}
