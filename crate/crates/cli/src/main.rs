//! Command-line front end: density grids, exact draws, walk paths and the
//! verification suite.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use skewbm::verify::{default_suite, run_checks, CheckSpec};
use skewbm::{
    density, sample_joint_many, simulate_batch, InterfacePolicy, QueryPoint, RngStream, Side, SkewParams, TieRule,
    WalkConfig,
};

use config::{ConfigFile, Resolver};

/// Exit codes.
const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "skewbm", version, about = "Skew Brownian motion: joint law of position and local time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the joint density on a (y, ℓ) grid.
    Density(DensityArgs),
    /// Draw exact samples of (position, local time).
    Sample(SampleArgs),
    /// Simulate skew random walk paths.
    Simulate(SimulateArgs),
    /// Run verification checks and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Skewness α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Starting point.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Time horizon.
    #[arg(long)]
    t: Option<f64>,
    /// Drift (walks only).
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
    /// Random seed; falls back to $SKEWBM_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// File of `key = value` lines; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_max: Option<f64>,
    #[arg(long)]
    y_steps: Option<usize>,
    #[arg(long)]
    ell_min: Option<f64>,
    #[arg(long)]
    ell_max: Option<f64>,
    #[arg(long)]
    ell_steps: Option<usize>,
    /// Which one-sided limit to report at y = 0; without it, a grid through 0 is rejected.
    #[arg(long, value_enum)]
    side: Option<SideArg>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    /// Number of draws.
    #[arg(long = "n-samples", short = 'N')]
    n_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Number of paths.
    #[arg(long = "n-samples", short = 'N')]
    n_samples: Option<usize>,
    /// Steps per unit time.
    #[arg(long, short = 'n')]
    steps: Option<u32>,
    /// How a step taken from site 0 counts towards the occupation time.
    #[arg(long, value_enum)]
    tie_rule: Option<TieArg>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// JSON array of checks to run instead of the built-in suite.
    #[arg(long)]
    checks: Option<PathBuf>,
    /// Print the names of the built-in checks and exit.
    #[arg(long)]
    list_checks: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SideArg {
    Above,
    Below,
    Avg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TieArg {
    Split,
    Strict,
}

/// Errors carry the exit code they map to.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl From<skewbm::Error> for CliError {
    fn from(e: skewbm::Error) -> Self {
        use skewbm::Error::*;
        match e {
            Domain(_) | InterfaceSide | Parameter(_) | Config(_) => CliError::Usage(e.to_string()),
            Quadrature(_) | IterationCap { .. } => CliError::Internal(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Everything shared by the subcommands after precedence is applied.
struct Settings {
    alpha: f64,
    x: f64,
    t: f64,
    v: f64,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
}

fn resolver(common: &Common) -> CliResult<Resolver> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(Resolver::new(file))
}

fn settings(common: &Common, r: &Resolver) -> CliResult<Settings> {
    let format = match common.format {
        Some(f) => f,
        None => match r.string("format") {
            Some(s) => Format::from_str(&s, true).map_err(|_| CliError::Usage(format!("unknown format '{s}'")))?,
            None => Format::Csv,
        },
    };
    Ok(Settings {
        alpha: r.get("alpha", common.alpha, 0.5)?,
        x: r.get("x", common.x, 0.0)?,
        t: r.get("t", common.t, 1.0)?,
        v: r.get("v", common.v, 0.0)?,
        seed: r.seed(common.seed)?,
        format,
        out: common.out.clone().or_else(|| r.string("out").map(PathBuf::from)),
    })
}

fn open_output(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Internal(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: ?Sized + Serialize>(w: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn cmd_density(a: DensityArgs) -> CliResult<u8> {
    let r = resolver(&a.common)?;
    let st = settings(&a.common, &r)?;
    let s = SkewParams::new(st.alpha)?;
    let y_min = r.get("y-min", a.y_min, -3.0)?;
    let y_max = r.get("y-max", a.y_max, 3.0)?;
    let y_steps = r.get("y-steps", a.y_steps, 60)?;
    let ell_min = r.get("ell-min", a.ell_min, 0.0)?;
    let ell_max = r.get("ell-max", a.ell_max, 3.0)?;
    let ell_steps = r.get("ell-steps", a.ell_steps, 31)?;
    if y_steps == 0 || ell_steps == 0 {
        return Err(CliError::Usage("grid step counts must be at least 1".into()));
    }
    if !(y_min <= y_max && ell_min <= ell_max) {
        return Err(CliError::Usage("grid bounds must satisfy min <= max".into()));
    }
    let side = match a.side {
        Some(side) => Some(side),
        None => r
            .string("side")
            .map(|s| SideArg::from_str(&s, true).map_err(|_| CliError::Usage(format!("unknown side '{s}'"))))
            .transpose()?,
    };
    let policy = match side {
        None => InterfacePolicy::Reject,
        Some(SideArg::Above) => InterfacePolicy::Side(Side::Above),
        Some(SideArg::Below) => InterfacePolicy::Side(Side::Below),
        Some(SideArg::Avg) => InterfacePolicy::Average,
    };

    let mut rows = Vec::with_capacity(y_steps * ell_steps);
    for y in linspace(y_min, y_max, y_steps) {
        for ell in linspace(ell_min, ell_max, ell_steps) {
            let p = QueryPoint::new(st.x, st.t, y, ell)?;
            let value = density(&p, &s, policy).map_err(|e| match e {
                skewbm::Error::InterfaceSide => CliError::Usage(
                    "the grid contains y = 0, where the density jumps; choose --side above|below|avg".into(),
                ),
                other => other.into(),
            })?;
            rows.push((y, ell, value.continuous, value.atom));
        }
    }

    let mut w = open_output(&st.out)?;
    match st.format {
        Format::Csv => {
            writeln!(w, "y,ell,continuous,atom")?;
            for (y, ell, c, atom) in &rows {
                writeln!(w, "{y},{ell},{c},{atom}")?;
            }
        }
        Format::Json => {
            let records: Vec<_> = rows
                .iter()
                .map(|&(y, ell, c, atom)| serde_json::json!({ "y": y, "ell": ell, "continuous": c, "atom": atom }))
                .collect();
            write_json(&mut *w, &records)?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn cmd_sample(a: SampleArgs) -> CliResult<u8> {
    let r = resolver(&a.common)?;
    let st = settings(&a.common, &r)?;
    let n = r.get("n-samples", a.n_samples, 1_000)?;
    let s = SkewParams::new(st.alpha)?;
    let draws = sample_joint_many(st.x, st.t, &s, n, &mut RngStream::new(st.seed, 0))?;
    let mut w = open_output(&st.out)?;
    match st.format {
        Format::Csv => {
            writeln!(w, "y,ell,hit")?;
            for d in &draws {
                writeln!(w, "{},{},{}", d.y, d.ell, d.hit)?;
            }
        }
        Format::Json => write_json(&mut *w, &draws)?,
    }
    w.flush()?;
    Ok(0)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<u8> {
    let r = resolver(&a.common)?;
    let st = settings(&a.common, &r)?;
    let n = r.get("n-samples", a.n_samples, 1_000)?;
    let steps = r.get("steps", a.steps, 10_000)?;
    let tie = match a.tie_rule {
        Some(t) => t,
        None => match r.string("tie-rule") {
            Some(s) => TieArg::from_str(&s, true).map_err(|_| CliError::Usage(format!("unknown tie rule '{s}'")))?,
            None => TieArg::Split,
        },
    };
    let tie = match tie {
        TieArg::Split => TieRule::Split,
        TieArg::Strict => TieRule::StrictlyPositive,
    };
    let cfg = WalkConfig::new(st.x, st.t, st.alpha, st.v, steps)?.with_tie_rule(tie);
    let paths = simulate_batch(&cfg, n, st.seed, 0)?;
    let mut w = open_output(&st.out)?;
    match st.format {
        Format::Csv => {
            writeln!(w, "terminal,local_time,occupation_pos")?;
            for p in &paths {
                writeln!(w, "{},{},{}", p.terminal, p.local_time, p.occupation_pos)?;
            }
        }
        Format::Json => write_json(&mut *w, &paths)?,
    }
    w.flush()?;
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> CliResult<u8> {
    let r = resolver(&a.common)?;
    let st = settings(&a.common, &r)?;
    if a.list_checks {
        let mut w = open_output(&st.out)?;
        for spec in default_suite(st.seed) {
            writeln!(w, "{}", spec.name)?;
        }
        w.flush()?;
        return Ok(0);
    }
    if a.common.format == Some(Format::Csv) {
        return Err(CliError::Usage("verification reports are written as JSON only".into()));
    }
    let specs = match a.checks.clone().or_else(|| r.string("checks").map(PathBuf::from)) {
        Some(path) => load_checks(&path, st.seed)?,
        None => default_suite(st.seed),
    };
    let report = run_checks(st.seed, &specs)?;
    let mut w = open_output(&st.out)?;
    writeln!(w, "{}", report.to_json())?;
    w.flush()?;
    Ok(if report.overall_pass { 0 } else { EXIT_VERIFY_FAIL })
}

/// Reads a JSON array of checks. Each check's `seed` is an offset added to
/// the run seed, so `--seed` reseeds a whole file at once.
fn load_checks(path: &PathBuf, seed: u64) -> CliResult<Vec<CheckSpec>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut specs: Vec<CheckSpec> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid checks file {}: {e}", path.display())))?;
    for s in &mut specs {
        s.seed = s.seed.wrapping_add(seed);
    }
    Ok(specs)
}
