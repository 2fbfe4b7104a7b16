//! The `isomet` command line: `test`, `simulate`, `invert`, `score-test`
//! and `synth`.
//!
//! Exit codes: 0 on completion (a rejection is a result, not a failure),
//! 2 for usage errors, 1 for runtime errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{Duration, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::geometry::{CirclePoint, Point, Space};
use crate::harness::{run_sweep, DeltaRule, Scenario, ScenarioParams, SweepConfig};
use crate::inference::{invert_test, isotropic_test, score_test_circle, TestConfig};
use crate::io::{
    format_point, ingest_angles, normalize_degrees, parse_point, read_points, write_angles,
    write_inversion_csv, write_sweep_csv, AngleRecord, AngleUnit, AngularDataset, IngestOptions,
    RunManifest,
};
use crate::rng::Streams;
use crate::sampling::{sample, DistributionSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "isomet",
    version,
    about = "Isotropic randomization tests for Fréchet means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a hypothesized Fréchet mean; prints a JSON report.
    Test(TestArgs),
    /// Monte Carlo rejection rates over an (n, delta) grid; prints CSV.
    Simulate(SimulateArgs),
    /// Confidence set for a circular mean by inverting the test over a grid.
    Invert(InvertArgs),
    /// Score test for a circular mean direction; prints a JSON report.
    ScoreTest(ScoreArgs),
    /// Write a synthetic daily wind-direction CSV drawn from a von Mises law.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceKind {
    Circle,
    Bw,
    Booklet,
    Euclidean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Deg,
    Rad,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Data column [default: direction for circle data, point otherwise].
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = "timestamp")]
    time_column: String,
    /// Unit of circular data.
    #[arg(long, value_enum, default_value = "deg")]
    unit: UnitArg,
    /// Keep only observations taken at this hour of the day.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..24))]
    hour: Option<u32>,
    /// First date kept (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    from: Option<NaiveDate>,
    /// Last date kept (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    to: Option<NaiveDate>,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long, value_enum)]
    space: SpaceKind,
    /// e.g. `225deg`, `2,0.5;0.5,1`, `1:0.4:0.2`, `0,1`.
    #[arg(long, allow_hyphen_values = true)]
    null_mean: String,
    /// Number of booklet branches.
    #[arg(long, default_value_t = 4, value_parser = positive)]
    branches: usize,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "ISOMET_THREADS", value_parser = positive)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("deltas").required(true).args(["delta_list", "local_c"]))]
struct SimulateArgs {
    /// circle-vm, circle-mixture, bw or booklet.
    #[arg(long)]
    scenario: Scenario,
    /// Comma-separated sample sizes.
    #[arg(long, required = true, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Comma-separated shifts applied at every n.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta_list: Option<Vec<f64>>,
    /// Local alternatives delta = c / sqrt(n).
    #[arg(long, allow_hyphen_values = true)]
    local_c: Option<f64>,
    #[arg(long, default_value_t = 500)]
    datasets: usize,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "ISOMET_THREADS", value_parser = positive)]
    threads: Option<usize>,
    /// Concentration of the circular scenarios.
    #[arg(long, value_parser = parse_positive_f64)]
    kappa: Option<f64>,
    /// Draw Bures-Wasserstein tangent vectors without the |eigenvalue| < 1 cut.
    #[arg(long)]
    bw_untruncated: bool,
    /// Record measured wall-clock seconds instead of 0 in the CSV.
    #[arg(long)]
    timing: bool,
    /// Output CSV; a run manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    grid_size: usize,
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "ISOMET_THREADS", value_parser = positive)]
    threads: Option<usize>,
    /// Output CSV; a run manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    null_mean: String,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Mean direction, e.g. `225deg`.
    #[arg(long, default_value = "225deg", allow_hyphen_values = true)]
    center: String,
    #[arg(long, default_value_t = 2.0, value_parser = parse_positive_f64)]
    kappa: f64,
    #[arg(long, default_value_t = 152, value_parser = positive)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Date of the first noon observation.
    #[arg(long, default_value = "2024-05-01", value_parser = parse_date)]
    start: NaiveDate,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("{s:?}: {e}"))
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(Error::Io(e))
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let result = match cli.command {
        Command::Test(a) => cmd_test(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, &argv, out),
        Command::Invert(a) => cmd_invert(a, &argv, out, err),
        Command::ScoreTest(a) => cmd_score_test(a, out, err),
        Command::Synth(a) => cmd_synth(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> crate::Result<T> + Send,
) -> crate::Result<T> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(f),
        None => f(),
    }
}

fn ingest_options(input: &InputArgs, default_column: &str) -> IngestOptions {
    IngestOptions {
        column: input
            .column
            .clone()
            .unwrap_or_else(|| default_column.into()),
        time_column: input.time_column.clone(),
        unit: match input.unit {
            UnitArg::Deg => AngleUnit::Degrees,
            UnitArg::Rad => AngleUnit::Radians,
        },
        hour: input.hour,
        from: input.from,
        to: input.to,
    }
}

fn load_angles(input: &InputArgs, err: &mut dyn Write) -> Result<AngularDataset, Failure> {
    let data = ingest_angles(&input.input, &ingest_options(input, "direction"))?;
    if data.skipped > 0 {
        writeln!(
            err,
            "{}: skipped {} invalid or filtered rows, kept {}",
            data.source.display(),
            data.skipped,
            data.records.len()
        )?;
    }
    Ok(data)
}

/// Work out the space from `--space` and the shape of the null mean.
fn resolve_space(kind: SpaceKind, null_mean: &str, branches: usize) -> Result<Space, Failure> {
    let usage = |e: Error| Failure::Usage(format!("--null-mean {null_mean:?}: {e}"));
    let count = |s: &str| {
        if s.trim().is_empty() {
            0
        } else {
            s.split(',').count()
        }
    };
    let space = match kind {
        SpaceKind::Circle => Space::circle(),
        SpaceKind::Bw => Space::bures_wasserstein(null_mean.split(';').count()).map_err(usage)?,
        SpaceKind::Booklet => {
            let page = null_mean.splitn(3, ':').nth(2).map_or(0, count);
            Space::booklet(branches, page + 1).map_err(usage)?
        }
        SpaceKind::Euclidean => Space::euclidean(count(null_mean)).map_err(usage)?,
    };
    Ok(space)
}

#[derive(Serialize)]
struct TestReport {
    space: String,
    null_mean: String,
    n: usize,
    observed_statistic: f64,
    p_value: f64,
    reject: bool,
    #[serde(rename = "B")]
    replicates: usize,
    alpha: f64,
    seed: u64,
    fallback_count: usize,
    degenerate_redraws: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    antipode_warning: Option<String>,
}

fn antipode_warning(mu: &CirclePoint) -> String {
    format!(
        "the reflection about {:.1}° also fixes its antipode {:.1}°, so the test cannot \
         separate these two candidate means",
        mu.degrees(),
        mu.antipode().degrees()
    )
}

fn cmd_test(a: TestArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let space = resolve_space(a.space, &a.null_mean, a.branches)?;
    let null = parse_point(&space, &a.null_mean)
        .map_err(|e| Failure::Usage(format!("--null-mean {:?}: {e}", a.null_mean)))?;
    let data = match space {
        Space::Circle => load_angles(&a.input, err)?.points(),
        _ => {
            let column = a.input.column.as_deref().unwrap_or("point");
            read_points(&a.input.input, column, &space)?
        }
    };
    let config = TestConfig::new(space.clone(), null.clone(), a.replicates, a.alpha, a.seed)?;
    let result = with_threads(a.threads, || isotropic_test(&data, &config))?;
    let report = TestReport {
        space: space.to_string(),
        null_mean: format_point(&null),
        n: data.len(),
        observed_statistic: result.observed_statistic,
        p_value: result.p_value,
        reject: result.reject,
        replicates: result.replicates,
        alpha: result.alpha,
        seed: result.seed,
        fallback_count: result.fallback_count,
        degenerate_redraws: result.degenerate_redraws,
        antipode_warning: null.as_circle().map(antipode_warning),
    };
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    writeln!(out, "{json}")?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, argv: &[String], out: &mut dyn Write) -> CmdResult {
    let started = Instant::now();
    let deltas = match (a.delta_list, a.local_c) {
        (Some(d), None) => DeltaRule::Grid(d),
        (None, Some(c)) => DeltaRule::Local { c },
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --delta-list and --local-c".into(),
            ))
        }
    };
    let mut params = ScenarioParams::default();
    if let Some(k) = a.kappa {
        params.vm_kappa = k;
        params.mixture_kappa = k;
    }
    params.bw_truncate = !a.bw_untruncated;
    let mut config = SweepConfig::new(a.scenario, a.n_list, deltas);
    config.datasets = a.datasets;
    config.replicates = a.replicates;
    config.alpha = a.alpha;
    config.seed = a.seed;
    config.threads = a.threads;
    config.params = params;
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let rows = run_sweep(&config)?;
    match &a.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write_sweep_csv(&mut f, &rows, a.timing)?;
            f.flush()?;
            let mut manifest = RunManifest::new("simulate", argv.to_vec(), config.seed);
            if let serde_json::Value::Object(map) =
                serde_json::to_value(&config).map_err(Error::from)?
            {
                manifest.flags.extend(map);
            }
            manifest.flag("timing", a.timing);
            manifest.finish(started.elapsed().as_secs_f64());
            manifest.write(&RunManifest::path_for(path))?;
        }
        None => write_sweep_csv(&mut *out, &rows, a.timing)?,
    }
    Ok(())
}

fn circle_grid(size: usize) -> Vec<Point> {
    (0..size)
        .map(|j| Point::angle(std::f64::consts::TAU * j as f64 / size as f64))
        .collect()
}

fn cmd_invert(
    a: InvertArgs,
    argv: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let started = Instant::now();
    let data = load_angles(&a.input, err)?;
    let grid = circle_grid(a.grid_size);
    let set = with_threads(a.threads, || {
        invert_test(
            &data.points(),
            &Space::circle(),
            &grid,
            a.replicates,
            a.alpha,
            a.seed,
        )
    })?;
    match &a.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write_inversion_csv(&mut f, &set)?;
            f.flush()?;
            let mut manifest = RunManifest::new("invert", argv.to_vec(), a.seed);
            manifest.flag("grid_size", a.grid_size);
            manifest.flag("replicates", a.replicates);
            manifest.flag("alpha", a.alpha);
            manifest.add_input(&a.input.input)?;
            manifest.finish(started.elapsed().as_secs_f64());
            manifest.write(&RunManifest::path_for(path))?;
        }
        None => write_inversion_csv(&mut *out, &set)?,
    }
    let failed = set.errors.iter().filter(|e| e.is_some()).count();
    if failed > 0 {
        writeln!(err, "{failed} grid points failed and count as rejected")?;
    }
    if set.intervals.is_empty() {
        writeln!(err, "accepted arcs (degrees): none")?;
    } else {
        writeln!(err, "accepted arcs (degrees):")?;
        for arc in &set.intervals {
            writeln!(
                err,
                "  [{:.1}, {:.1}] {} grid points",
                arc.start_degrees(),
                arc.end_degrees(),
                arc.points
            )?;
        }
    }
    Ok(())
}

fn cmd_score_test(a: ScoreArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let null = parse_point(&Space::circle(), &a.null_mean)
        .map_err(|e| Failure::Usage(format!("--null-mean {:?}: {e}", a.null_mean)))?;
    let data = load_angles(&a.input, err)?;
    let mu0 = *null.as_circle().expect("parsed as a circle point");
    let result = score_test_circle(&data.circle_points(), mu0, a.alpha)?;
    let json = serde_json::to_string_pretty(&result).map_err(Error::from)?;
    writeln!(out, "{json}")?;
    Ok(())
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> CmdResult {
    let center = parse_point(&Space::circle(), &a.center)
        .map_err(|e| Failure::Usage(format!("--center {:?}: {e}", a.center)))?;
    let mu = center
        .as_circle()
        .expect("parsed as a circle point")
        .theta();
    let spec = DistributionSpec::von_mises(mu, a.kappa)?;
    let mut rng = Streams::new(a.seed).stream(&[0]);
    let points = sample(&spec, a.n, &mut rng)?;
    let noon = a.start.and_hms_opt(12, 0, 0).expect("valid time");
    let records: Vec<AngleRecord> = points
        .iter()
        .enumerate()
        .map(|(i, p)| AngleRecord {
            timestamp: Some(
                (noon + Duration::days(i as i64))
                    .format("%Y-%m-%dT%H:%M:%S")
                    .to_string(),
            ),
            direction_degrees: normalize_degrees(p.as_circle().expect("circle").degrees()),
        })
        .collect();
    match &a.out {
        Some(path) => write_to(path, &records)?,
        None => write_angles(&mut *out, &records)?,
    }
    Ok(())
}

fn write_to(path: &Path, records: &[AngleRecord]) -> crate::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_angles(&mut f, records)?;
    f.flush()?;
    Ok(())
}
