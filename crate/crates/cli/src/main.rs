//! Command-line front end: bound computation, one-shot estimation, Monte
//! Carlo verification, and grid sweeps, all with machine-readable output.
//!
//! Exit codes are stable: 0 success, 2 argument/validation error, 3 sample
//! budget exhausted, 4 i/o error, 5 verification failed. Reports are
//! byte-deterministic for fixed inputs; seeds are always explicit flags so
//! every run is auditable.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cardest::bounds::{self, Precision};
use cardest::harness::{self, GridPoint, VerificationReport};
use cardest::report::JsonBuilder;
use cardest::samplers::{FileSource, IdentityMode, RngSeed, SamplingSource, SyntheticSource};
use cardest::{estimator, Error};

const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET_EXHAUSTED: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VERIFY_FAILED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "cardest",
    version,
    about = "Cardinality estimation through uniform random sampling, with verified sample bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print k_err and the sample-count bounds for a precision target
    Bounds(BoundsArgs),
    /// Run the estimator once against a synthetic or file-backed set
    Estimate(EstimateArgs),
    /// Monte Carlo verification of the guarantee at a known cardinality
    Verify(VerifyArgs),
    /// Run the verify criterion over every point of a CSV grid
    Sweep(SweepArgs),
}

#[derive(Args)]
struct PrecisionArgs {
    /// Relative accuracy target delta_err, strictly between 0 and 1
    #[arg(long = "delta")]
    delta: f64,
    /// Total error probability p_err, strictly between 0 and 1
    #[arg(long = "p-err")]
    p_err: f64,
}

impl PrecisionArgs {
    fn build(&self) -> Result<Precision, Failure> {
        Precision::new(self.delta, self.p_err)
            .map_err(|e| fail(EXIT_VALIDATION, e.to_string()))
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Known set cardinality; adds the sample budget and hard cap to the report
    #[arg(long)]
    n: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Sample the synthetic set {0, .., n-1} of known size
    #[arg(long)]
    n: Option<u64>,
    /// Sample the lines of this newline-delimited UTF-8 file
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IdentityArg {
    /// Each line index is an element (uniform by construction)
    Position,
    /// Each line's content is an element (uniform only if lines are distinct)
    Content,
}

impl From<IdentityArg> for IdentityMode {
    fn from(v: IdentityArg) -> IdentityMode {
        match v {
            IdentityArg::Position => IdentityMode::Position,
            IdentityArg::Content => IdentityMode::Content,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// How a sampled line is identified (file sources only)
    #[arg(long, value_enum, default_value_t = IdentityArg::Position)]
    identity: IdentityArg,
    /// Base seed of the draw stream (stream id 0)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Abort with exit code 3 if the run would exceed this many samples
    #[arg(long)]
    hard_cap: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Known cardinality of the synthetic set under test
    #[arg(long)]
    n: u64,
    /// Number of independent trials (trial i draws from stream id i)
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Base seed shared by all trials
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// CSV grid of points to verify, header exactly `n,delta_err,p_err`
    #[arg(long)]
    grid: PathBuf,
    /// Number of independent trials per grid point
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Base seed shared by all points and trials
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::BudgetExhausted { .. } => EXIT_BUDGET_EXHAUSTED,
            Error::Io { .. } | Error::EmptyFile { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display()))),
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<u8, Failure> {
    let precision = args.precision.build()?;
    let k = bounds::compute_k_err(precision)?;
    let mut builder = JsonBuilder::new();
    if let Some(n) = args.n {
        builder = builder
            .u64("budget", bounds::sample_budget(n, k)?)
            .u64("hard_cap", bounds::hard_cap(n, k)?);
    }
    let json = builder.u64("k_ceil", k.ceil()).f64("k_err", k.value()).finish();
    emit(&args.output, &json)?;
    Ok(0)
}

fn cmd_estimate(args: EstimateArgs) -> Result<u8, Failure> {
    let precision = args.precision.build()?;
    let seed = RngSeed::new(args.seed, 0);
    let mut source: Box<dyn SamplingSource> = match (&args.source.n, &args.source.input) {
        (Some(n), None) => Box::new(SyntheticSource::new(*n, seed)?),
        (None, Some(path)) => {
            let file = FileSource::load(path, args.identity.into(), seed)?;
            if args.identity == IdentityArg::Content && file.duplicate_count() > 0 {
                eprintln!(
                    "warning: {} duplicate line(s) out of {}; draws are not uniform over \
                     the distinct contents, so the accuracy guarantee does not apply",
                    file.duplicate_count(),
                    file.line_count()
                );
            }
            Box::new(file)
        }
        // clap's argument group guarantees exactly one source flag
        _ => unreachable!(),
    };
    let estimate = estimator::run(precision, || source.draw(), args.hard_cap)?;
    let json = JsonBuilder::new()
        .u64("denominator", estimate.denominator)
        .u64("distinct", estimate.distinct)
        .f64("estimate", estimate.value)
        .u128("numerator", estimate.numerator)
        .u64("samples_used", estimate.samples_used)
        .u64("seed", args.seed)
        .finish();
    emit(&args.output, &json)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let precision = args.precision.build()?;
    match harness::run_trials(args.n, precision, args.trials, args.seed) {
        Ok(report) => {
            emit(&args.output, &report.to_json())?;
            Ok(if report.passes() { 0 } else { EXIT_VERIFY_FAILED })
        }
        // A hard-cap violation is itself a verification failure: emit what
        // completed, report the cause, exit 5.
        Err(Error::BatchAborted {
            trial,
            source,
            partial,
        }) => {
            emit(&args.output, &partial.to_json())?;
            eprintln!("error: trial {trial} aborted verification: {source}");
            Ok(EXIT_VERIFY_FAILED)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let grid = parse_grid(&args.grid)?;
    let outcomes = harness::sweep(&grid, args.trials, args.seed)?;

    let mut all_pass = true;
    let mut reports: Vec<VerificationReport> = Vec::with_capacity(outcomes.len());
    for (point, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(report) => {
                all_pass &= report.passes();
                reports.push(report);
            }
            Err(Error::BatchAborted {
                trial,
                source,
                partial,
            }) => {
                all_pass = false;
                eprintln!(
                    "error: point n={} aborted at trial {trial}: {source}",
                    point.n
                );
                reports.push(*partial);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let text = match args.format {
        FormatArg::Csv => {
            let mut lines = vec![VerificationReport::csv_header().to_string()];
            lines.extend(reports.iter().map(VerificationReport::csv_row));
            lines.join("\n")
        }
        FormatArg::Json => {
            let body: Vec<String> = reports.iter().map(VerificationReport::to_json).collect();
            format!("[{}]", body.join(","))
        }
    };
    emit(&args.output, &text)?;
    Ok(if all_pass { 0 } else { EXIT_VERIFY_FAILED })
}

/// Parses the sweep grid: header `n,delta_err,p_err`, one point per row.
/// All malformed rows are reported together, cited by line number.
fn parse_grid(path: &Path) -> Result<Vec<GridPoint>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == "n,delta_err,p_err" => {}
        _ => {
            return Err(fail(
                EXIT_VALIDATION,
                "grid header must be exactly `n,delta_err,p_err`",
            ))
        }
    }

    let mut points = Vec::new();
    let mut bad_lines = Vec::new();
    for (idx, line) in lines {
        let line_number = idx + 1;
        let row = line.trim_end_matches('\r');
        if row.trim().is_empty() {
            continue;
        }
        match parse_grid_row(row) {
            Some(point) => points.push(point),
            None => bad_lines.push(line_number.to_string()),
        }
    }
    if !bad_lines.is_empty() {
        return Err(fail(
            EXIT_VALIDATION,
            format!("malformed grid row(s) at line(s): {}", bad_lines.join(", ")),
        ));
    }
    if points.is_empty() {
        return Err(fail(EXIT_VALIDATION, "grid contains no data rows"));
    }
    Ok(points)
}

fn parse_grid_row(row: &str) -> Option<GridPoint> {
    let mut fields = row.split(',');
    let n: u64 = fields.next()?.trim().parse().ok()?;
    let delta: f64 = fields.next()?.trim().parse().ok()?;
    let p_err: f64 = fields.next()?.trim().parse().ok()?;
    if fields.next().is_some() || n == 0 {
        return None;
    }
    let precision = Precision::new(delta, p_err).ok()?;
    Some(GridPoint { n, precision })
}
