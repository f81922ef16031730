//! The `sudlerlab` experiment runner.
//!
//! Every subcommand produces one [`Report`], written as CSV or JSON to stdout or
//! `--out`. With `--out`, a `<out>.manifest.json` sidecar records the run
//! configuration, wall time and precision; the payload itself depends only on
//! the configuration, never on `--workers` or `--chunk-size`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sudlerlab_core::alpha_spec::GRAMMAR;
use sudlerlab_core::birkhoff::{StreamOptions, SummandKind};
use sudlerlab_core::rotation::DEFAULT_CHUNK_SIZE;
use sudlerlab_core::stats::dyadic_grid;
use sudlerlab_core::{Error, PartialQuotientSource, VERSION};

mod commands;
pub mod report;

pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "sudlerlab",
    version,
    about = "Sudler products, Diophantine sums and Birkhoff sums along irrational rotations",
    after_help = concat!(
        "Alpha grammar: golden | sqrt:<D> | quadratic:<a0>;<pre>|<period> | e | list:<a1,a2,...> | random:<seed>[:<bits>]\n",
        "Grids: comma-separated increasing list, or dyadic:<lo>:<hi> for 2^lo..2^hi.\n",
        "All logarithms are natural; all sums are dimensionless."
    )
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file (default stdout). A `<out>.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; does not affect results.
    #[arg(long, global = true, env = "SUDLERLAB_WORKERS")]
    pub workers: Option<usize>,

    /// Orbit indices per parallel chunk; does not affect results.
    #[arg(long, global = true, default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: u64,

    /// Fixed-point precision in bits (default grows with the horizon).
    #[arg(long, global = true)]
    pub bits: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summand {
    LogSudler,
    LogDiophantine,
    Sawtooth,
    Indicator,
}

#[derive(Args, Debug, Clone)]
pub struct SummandArgs {
    /// Birkhoff summand.
    #[arg(long, value_enum, default_value_t = Summand::LogSudler)]
    pub summand: Summand,
    /// Left endpoint for `indicator`.
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Right endpoint for `indicator`.
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
}

impl SummandArgs {
    pub fn kind(&self) -> SummandKind {
        match self.summand {
            Summand::LogSudler => SummandKind::LogSudler,
            Summand::LogDiophantine => SummandKind::LogDiophantine,
            Summand::Sawtooth => SummandKind::BeckSawtooth,
            Summand::Indicator => SummandKind::Indicator { a: self.a, b: self.b },
        }
    }
}

/// Strictly increasing list of horizons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid(pub Vec<u64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let points = if let Some(rest) = s.strip_prefix("dyadic:") {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| format!("expected dyadic:<lo>:<hi>, got `{s}`"))?;
            let lo: u32 = lo.parse().map_err(|e| format!("bad exponent `{lo}`: {e}"))?;
            let hi: u32 = hi.parse().map_err(|e| format!("bad exponent `{hi}`: {e}"))?;
            if lo > hi || hi > 62 {
                return Err(format!("need lo <= hi <= 62 in `{s}`"));
            }
            dyadic_grid(lo, hi)
        } else {
            s.split(',')
                .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad grid point `{p}`: {e}")))
                .collect::<Result<Vec<_>, _>>()?
        };
        if points.is_empty() || points[0] == 0 || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err("grid must be positive and strictly increasing".into());
        }
        Ok(Grid(points))
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Partial quotients and convergents. CSV columns: k, a, p, q (row 0 holds a_0, p_0, q_0).
    Cf {
        #[arg(long)]
        alpha: String,
        /// Last index k.
        #[arg(long)]
        k: usize,
    },
    /// Prefix sums S_N for N = 1..=max-n. CSV columns: N, <value>, err where <value> is
    /// logP, logD (log of the Diophantine product) or S.
    Sudler {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        max_n: u64,
        #[command(flatten)]
        summand: SummandArgs,
        /// Also write (N: u64 LE, value: f64 LE) records to this file.
        #[arg(long)]
        binary: Option<PathBuf>,
    },
    /// Temporal mean and variance over N = 1..=M with predicted main terms.
    /// CSV: one row of summary fields.
    Moments {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        m: u64,
        #[command(flatten)]
        summand: SummandArgs,
        /// Fourier cutoff for sawtooth/indicator predictions (marks the model truncated).
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Diophantine sum Σ 1/(8π² m² ‖mα‖²). CSV columns: M, sum, ratio (sum / log M).
    /// With --k: the partial-quotient square-sum law at q_k; columns k, q_k, lhs, rhs, ratio, error_scale.
    DiophSum {
        #[arg(long)]
        alpha: String,
        #[arg(long, conflicts_with_all = ["grid", "k"])]
        m: Option<u64>,
        #[arg(long, conflicts_with = "k")]
        grid: Option<Grid>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Least-squares σ² from Diophantine sums over a grid. CSV columns: M, sum, ratio.
    Sigma2 {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "dyadic:10:20")]
        grid: Grid,
    },
    /// KS distance of (log P_N - ½ log N)/√(σ² log N), N = 2..=M, to the standard normal.
    /// CSV columns: level, quantile.
    Clt {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        m: u64,
        /// σ²; defaults to the closed form for golden and sqrt:3.
        #[arg(long)]
        sigma2: Option<f64>,
    },
    /// max_N |log P_N + log P_{q_k-N-1} - log q_k| over 0 <= N < q_k.
    /// CSV columns: k, q_k, value, argmax.
    Symmetry {
        #[arg(long)]
        alpha: String,
        /// One or more convergent indices, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
    },
    /// Extremes of log P_N over 0 <= N < q_k against V(a_1 + ... + a_k).
    /// CSV columns: k, q_k, max, min, argmax, argmin, predicted, ratio, error_scale, symmetry_residual.
    Extremes {
        #[arg(long)]
        alpha: String,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
    },
    /// Predicted main terms of A_M and B_M² from Fourier coefficients, next to the
    /// empirical moments. CSV: one row of summary fields.
    BirkhoffPredict {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        m: u64,
        #[command(flatten)]
        summand: SummandArgs,
        /// Keep only coefficients 0 < |m| <= cutoff (marks the model truncated).
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// B_M²/log M for I_[0,L]({x}) - L over a grid. CSV columns: M, variance, ratio,
    /// predicted_variance_main, predicted_ratio.
    Bu {
        #[arg(long)]
        alpha: String,
        /// Interval length L.
        #[arg(long, conflicts_with = "length_q")]
        length: Option<f64>,
        /// Use the bounded-remainder length L = {qα}.
        #[arg(long)]
        length_q: Option<u64>,
        #[arg(long, default_value = "dyadic:10:20")]
        grid: Grid,
    },
    /// V = ∫_0^{5/6} log|2 sin(πx)| dx. CSV columns: V, tol, full_period.
    Vconst {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Lévy statistic (2 log²2/π) Σ_{l<=k} a_l² / k² over Gauss-random α.
    /// CSV columns: seed, statistic, sum_squares, max_quotient, log_qk.
    AeLevy {
        /// Number of seeds.
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed_start: u64,
        #[arg(long, default_value_t = 10_000)]
        k: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cf { .. } => "cf",
            Command::Sudler { .. } => "sudler",
            Command::Moments { .. } => "moments",
            Command::DiophSum { .. } => "dioph-sum",
            Command::Sigma2 { .. } => "sigma2",
            Command::Clt { .. } => "clt",
            Command::Symmetry { .. } => "symmetry",
            Command::Extremes { .. } => "extremes",
            Command::BirkhoffPredict { .. } => "birkhoff-predict",
            Command::Bu { .. } => "bu",
            Command::Vconst { .. } => "vconst",
            Command::AeLevy { .. } => "ae-levy",
        }
    }
}

/// Failure of a run, mapped onto the exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "{m}"),
            RunError::Core(e @ Error::Parse { reason, .. }) if !reason.contains(GRAMMAR) => {
                write!(f, "{e}\nalpha grammar: {GRAMMAR}")
            }
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

pub(crate) fn parse_alpha(spec: &str) -> Result<PartialQuotientSource, RunError> {
    Ok(spec.parse::<PartialQuotientSource>()?)
}

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub opts: StreamOptions,
    /// Largest precision actually used, for the manifest.
    pub precision_bits: Option<u32>,
    pub binary: Option<File>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    artifact_version: &'static str,
    command: &'static str,
    arguments: Vec<String>,
    outputs: Vec<String>,
    format: &'static str,
    workers: usize,
    chunk_size: u64,
    precision_bits: Option<u32>,
    wall_time_seconds: f64,
    guard_incidents: u64,
    status: &'a str,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<File, RunError> {
    File::create(path)
        .map_err(|e| RunError::Usage(format!("cannot write `{}`: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run_cli(&cli, echo, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli, echo: Vec<String>, stdout: &mut dyn Write) -> Result<(), RunError> {
    let start = Instant::now();
    if cli.chunk_size == 0 {
        return Err(RunError::Usage("--chunk-size must be positive".into()));
    }
    let workers = match cli.workers {
        Some(0) => return Err(RunError::Usage("--workers must be positive".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    // Open every output before computing so unwritable paths fail fast.
    let out_file = cli.out.as_deref().map(create).transpose()?;
    let binary = match &cli.command {
        Command::Sudler { binary: Some(p), .. } => Some(create(p)?),
        _ => None,
    };
    let mut outputs: Vec<String> = cli.out.iter().map(|p| p.display().to_string()).collect();
    if let Command::Sudler { binary: Some(p), .. } = &cli.command {
        outputs.push(p.display().to_string());
    }
    let mut ctx = Context {
        opts: StreamOptions {
            bits: cli.bits,
            chunk_size: cli.chunk_size,
        },
        precision_bits: cli.bits,
        binary,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let result = pool.install(|| commands::execute(&cli.command, &mut ctx));

    let status = match &result {
        Ok(_) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    let guard_incidents = match &result {
        Err(RunError::Core(Error::SingularitySuspect { .. })) => 1,
        _ => 0,
    };
    if let Some(out) = &cli.out {
        let manifest = RunManifest {
            artifact_version: VERSION,
            command: cli.command.name(),
            arguments: echo,
            outputs,
            format: match cli.format {
                Format::Csv => "csv",
                Format::Json => "json",
            },
            workers,
            chunk_size: cli.chunk_size,
            precision_bits: ctx.precision_bits,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            guard_incidents,
            status: &status,
        };
        let mut m = BufWriter::new(create(&manifest_path(out))?);
        serde_json::to_writer_pretty(&mut m, &manifest).map_err(std::io::Error::from)?;
        writeln!(m)?;
        m.flush()?;
    }
    let report = result?;
    match out_file {
        Some(f) => write_report(&report, cli.format, BufWriter::new(f))?,
        None => write_report(&report, cli.format, &mut *stdout)?,
    }
    Ok(())
}

fn write_report<W: Write>(report: &Report, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Csv => report.write_csv(w),
        Format::Json => report.write_json(w),
    }
}
