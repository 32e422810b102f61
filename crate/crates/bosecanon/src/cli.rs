//! The `bosecanon` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use bosecanon_core::compositions::{count_bounded, CapVector};
use bosecanon_core::numerics::{Backend, LogFloat, Mode, Rational};
use bosecanon_core::occupancy::{
    beta_derivative_ground, covariance_matrix, level_marginal, Sampler, SAMPLER_ALGORITHM,
};
use bosecanon_core::partition::{z_bruteforce, z_convolution, z_powersum};
use bosecanon_core::spectrum::{InverseTemperature, WeightVector};
use bosecanon_core::verify::{
    random_extensions, CampaignConfig, CampaignSummary, Instance, SystemDescriptor, TheoremOptions,
    TheoremSystem, VerificationReport, Verifier,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::format::{
    counts_json, counts_table, inverse_temperature_csv, inverse_temperature_json, linear_csv,
    real_csv, real_json, report_json, reports_table, value_csv, value_json, Output, Table,
};
use crate::parallel;
use crate::spectrum_file::{parse_rational, FormatError, Number, SpectrumFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bosecanon",
    version,
    about = "Canonical-ensemble statistics of ideal Bose gases on finite spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Logfloat,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Logfloat => Mode::LogFloat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Powersum,
    Convolution,
    Bruteforce,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Spectrum JSON file (levels with beta, or weights)
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Arithmetic mode; defaults to the mode named in the spectrum file
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Write data here instead of standard output
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition function Z_0..Z_nmax
    Zn {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "powersum")]
        method: Method,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Mean occupations, or the occupation distribution of one level
    Occupancy {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        /// Particle number
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        /// Report the marginal distribution of this level
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Covariance matrix of the occupation numbers
    Covariance {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Derivative of the ground occupation with respect to beta
    BetaDerivative {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Condensate fraction <N_0>/N along a beta grid
    CondensateCurve {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        /// Grid "start:stop:steps" with rational endpoints; steps intervals, steps + 1 points
        #[arg(long)]
        beta: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Configurations drawn from the canonical distribution
    Sample {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Random seed; a fresh one is chosen and echoed when omitted
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bounded composition counts a(p|m)
    Count {
        /// Caps, plus-separated, e.g. 2+3+7
        #[arg(long)]
        caps: String,
        /// Only this m (default: the whole row)
        #[arg(long, allow_negative_numbers = true)]
        m: Option<i64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the convexity lemma, the monotonicity theorem and the identities
    Verify {
        /// Verify this spectrum; without it a seeded random campaign runs
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Largest particle number checked for a given spectrum
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        /// Random seed; a fresh one is chosen and echoed when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Extra weights for the added-level check, comma-separated rationals
        #[arg(long)]
        extra_weights: Option<String>,
        /// Campaign size
        #[arg(long, default_value_t = 100)]
        instances: u64,
        #[arg(long, default_value_t = 1)]
        min_levels: usize,
        #[arg(long, default_value_t = 5)]
        max_levels: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        /// Only list failing comparisons in JSON output
        #[arg(long)]
        failures_only: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Level-decomposition and product-decomposition identity checks
    Decompose {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[arg(short = 'n', long = "particles", visible_alias = "n")]
        n: usize,
        /// Restrict the level-decomposition checks to one level
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] FormatError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<bosecanon_core::Error> for CliError {
    fn from(e: bosecanon_core::Error) -> Self {
        use bosecanon_core::Error as E;
        match e {
            E::IndexOutOfRange { .. }
            | E::DuplicateIndex(_)
            | E::SameLevel(_)
            | E::InvalidCaps
            | E::CapsBind { .. }
            | E::NoParticles
            | E::InvalidBetaGrid
            | E::LimitExceeded { .. }
            | E::InstanceTooLarge { .. }
            | E::InvalidConfig(_)
            | E::NonPositivePartitionTarget(_) => CliError::Usage(e.to_string()),
            other => CliError::Input(FormatError::Core(other)),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Io(_) => EXIT_VERIFICATION_FAILED,
        }
    }
}

/// What a subcommand produced: data, plus whether a check failed.
pub struct Outcome {
    pub output: Output,
    pub failed: bool,
}

impl Outcome {
    fn data(output: Output) -> Self {
        Outcome {
            output,
            failed: false,
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Data goes to `stdout` or the `--output` file,
/// diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let target = output_path(&cli.command);
    match execute(cli.command, stderr) {
        Ok(outcome) => {
            let written = match target {
                Some(path) => std::fs::File::create(&path)
                    .and_then(|f| outcome.output.write(std::io::BufWriter::new(f))),
                None => outcome.output.write(&mut *stdout),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return EXIT_VERIFICATION_FAILED;
            }
            if outcome.failed {
                let _ = writeln!(stderr, "verification failed");
                EXIT_VERIFICATION_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn output_path(cmd: &Command) -> Option<PathBuf> {
    let out = match cmd {
        Command::Zn { out, .. }
        | Command::Occupancy { out, .. }
        | Command::Covariance { out, .. }
        | Command::BetaDerivative { out, .. }
        | Command::CondensateCurve { out, .. }
        | Command::Sample { out, .. }
        | Command::Count { out, .. }
        | Command::Verify { out, .. }
        | Command::Decompose { out, .. } => out,
    };
    out.output.clone()
}

struct Loaded {
    file: SpectrumFile,
    mode: Mode,
}

fn load(args: &SpectrumArgs) -> Result<Loaded, CliError> {
    let file = SpectrumFile::read(&args.spectrum)?;
    let mode = args.mode.map(Mode::from).unwrap_or(file.mode);
    file.check(mode)?;
    Ok(Loaded { file, mode })
}

macro_rules! dispatch {
    ($mode:expr, $f:ident ( $($arg:expr),* )) => {
        match $mode {
            Mode::Exact => $f::<Rational>($($arg),*),
            Mode::LogFloat => $f::<LogFloat>($($arg),*),
        }
    };
}

fn seed_or_entropy(seed: Option<u64>, stderr: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        let _ = writeln!(stderr, "seed: {s}");
        s
    })
}

fn execute(cmd: Command, stderr: &mut dyn Write) -> Result<Outcome, CliError> {
    match cmd {
        Command::Zn {
            spectrum,
            nmax,
            method,
            out,
        } => {
            let l = load(&spectrum)?;
            dispatch!(l.mode, zn(&l.file, nmax, method, out.format)).map(Outcome::data)
        }
        Command::Occupancy {
            spectrum,
            n,
            level,
            out,
        } => {
            let l = load(&spectrum)?;
            dispatch!(l.mode, occupancy(&l.file, n, level, out.format)).map(Outcome::data)
        }
        Command::Covariance { spectrum, n, out } => {
            let l = load(&spectrum)?;
            dispatch!(l.mode, covariance(&l.file, n, out.format)).map(Outcome::data)
        }
        Command::BetaDerivative { spectrum, n, out } => {
            let l = load(&spectrum)?;
            dispatch!(l.mode, beta_derivative(&l.file, n, out.format)).map(Outcome::data)
        }
        Command::CondensateCurve {
            spectrum,
            n,
            beta,
            out,
        } => {
            let l = load(&spectrum)?;
            let grid = parse_beta_grid(&beta)?;
            let betas = grid
                .iter()
                .map(|b| {
                    l.file
                        .inverse_temperature_at(l.mode, &Number::Rational(b.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            dispatch!(l.mode, condensate(&l.file, l.mode, n, &betas, out.format)).map(Outcome::data)
        }
        Command::Sample {
            spectrum,
            n,
            count,
            seed,
            out,
        } => {
            let l = load(&spectrum)?;
            let seed = seed_or_entropy(seed, stderr);
            dispatch!(l.mode, sample(&l.file, n, count, seed, out.format)).map(Outcome::data)
        }
        Command::Count { caps, m, out } => count(&caps, m, out.format).map(Outcome::data),
        Command::Verify {
            spectrum,
            mode,
            nmax,
            seed,
            extra_weights,
            instances,
            min_levels,
            max_levels,
            max_n,
            failures_only,
            out,
        } => {
            let seed = seed_or_entropy(seed, stderr);
            let extras = extra_weights
                .as_deref()
                .map(|s| {
                    s.split(',')
                        .map(parse_rational)
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()
                .map_err(|e| CliError::Usage(format!("--extra-weights: {e}")))?;
            let summary = match spectrum {
                Some(path) => {
                    let l = load(&SpectrumArgs {
                        spectrum: path,
                        mode,
                    })?;
                    dispatch!(l.mode, verify_spectrum(&l.file, nmax, seed, extras.clone()))?
                }
                None => {
                    let config = CampaignConfig {
                        seed,
                        instances,
                        min_levels,
                        max_levels,
                        max_n,
                        ..Default::default()
                    };
                    let mode = mode.map(Mode::from).unwrap_or(Mode::Exact);
                    dispatch!(mode, campaign(&config))?
                }
            };
            Ok(verify_outcome(&summary, out.format, failures_only))
        }
        Command::Decompose {
            spectrum,
            n,
            level,
            out,
        } => {
            let l = load(&spectrum)?;
            let reports = dispatch!(l.mode, decompose(&l.file, n, level))?;
            let failed = reports
                .iter()
                .any(|r| r.verdict == bosecanon_core::verify::Verdict::Fail);
            let output = match out.format {
                FormatArg::Csv => Output::Csv(reports_table(&reports)),
                FormatArg::Json => {
                    Output::Json(Value::Array(reports.iter().map(report_json).collect()))
                }
            };
            Ok(Outcome { output, failed })
        }
    }
}

fn mode_name(mode: Mode) -> Value {
    Value::String(mode.to_string())
}

fn zn<S: Backend>(
    file: &SpectrumFile,
    nmax: usize,
    method: Method,
    format: FormatArg,
) -> Result<Output, CliError> {
    let w: WeightVector<S> = file.weights()?;
    let table = match method {
        Method::Powersum => z_powersum(&w, nmax),
        Method::Convolution => z_convolution(&w, nmax),
        Method::Bruteforce => z_bruteforce(&w, nmax)?,
    };
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table::new(["N", if S::MODE == Mode::Exact { "Z" } else { "ln_Z" }]);
            for (n, z) in table.values().iter().enumerate() {
                t.push(vec![n.to_string(), value_csv(z)]);
            }
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(json!({
            "mode": mode_name(S::MODE),
            "nmax": nmax,
            "Z": table.values().iter().map(value_json).collect::<Vec<_>>(),
        })),
    })
}

fn occupancy<S: Backend>(
    file: &SpectrumFile,
    n: usize,
    level: Option<usize>,
    format: FormatArg,
) -> Result<Output, CliError> {
    let w: WeightVector<S> = file.weights()?;
    match level {
        Some(i) => {
            let p = level_marginal(&w, n, i)?;
            Ok(match format {
                FormatArg::Csv => {
                    let mut t = Table::new(["m", "probability"]);
                    for (m, x) in p.probs.iter().enumerate() {
                        t.push(vec![m.to_string(), linear_csv(x)]);
                    }
                    Output::Csv(t)
                }
                FormatArg::Json => Output::Json(json!({
                    "mode": mode_name(S::MODE),
                    "N": n,
                    "level": i,
                    "mean": value_json(&p.mean()),
                    "marginal": p.probs.iter().map(value_json).collect::<Vec<_>>(),
                })),
            })
        }
        None => {
            let means = (0..w.len())
                .map(|i| bosecanon_core::occupancy::mean_occupation(&w, n, i))
                .collect::<Result<Vec<S>, _>>()?;
            Ok(match format {
                FormatArg::Csv => {
                    let mut t = Table::new(["level", "mean"]);
                    for (i, m) in means.iter().enumerate() {
                        t.push(vec![i.to_string(), linear_csv(m)]);
                    }
                    Output::Csv(t)
                }
                FormatArg::Json => Output::Json(json!({
                    "mode": mode_name(S::MODE),
                    "N": n,
                    "means": means.iter().map(value_json).collect::<Vec<_>>(),
                })),
            })
        }
    }
}

fn covariance<S: Backend>(
    file: &SpectrumFile,
    n: usize,
    format: FormatArg,
) -> Result<Output, CliError> {
    let w: WeightVector<S> = file.weights()?;
    let stats = covariance_matrix(&w, n)?;
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table::new(["i", "j", "cov"]);
            for (i, row) in stats.covariance.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    t.push(vec![i.to_string(), j.to_string(), real_csv::<S>(c)]);
                }
            }
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(json!({
            "mode": mode_name(S::MODE),
            "N": n,
            "means": stats.means.iter().map(value_json).collect::<Vec<_>>(),
            "cov": stats.covariance.iter().map(|row| row.iter().map(real_json::<S>).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
    })
}

fn beta_derivative<S: Backend>(
    file: &SpectrumFile,
    n: usize,
    format: FormatArg,
) -> Result<Output, CliError> {
    let levels = file.level_set(S::MODE)?;
    let d = beta_derivative_ground::<S>(&levels, n)?;
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table::new(["N", "d_mean_ground_d_beta"]);
            t.push(vec![n.to_string(), real_csv::<S>(&d)]);
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(json!({
            "mode": mode_name(S::MODE),
            "N": n,
            "d_mean_ground_d_beta": real_json::<S>(&d),
        })),
    })
}

/// `start:stop:steps` with rational endpoints: `steps + 1` equally spaced
/// points from `start` to `stop`.
pub fn parse_beta_grid(spec: &str) -> Result<Vec<Rational>, CliError> {
    let usage = |msg: &str| CliError::Usage(format!("--beta {spec:?}: {msg}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(usage("expected start:stop:steps"));
    };
    let start = parse_rational(start).map_err(|e| usage(&e.to_string()))?;
    let stop = parse_rational(stop).map_err(|e| usage(&e.to_string()))?;
    let steps: u32 = steps
        .trim()
        .parse()
        .map_err(|_| usage("steps must be a positive integer"))?;
    if steps == 0 {
        return Err(usage("steps must be at least 1"));
    }
    if stop <= start {
        return Err(usage("stop must exceed start"));
    }
    if start <= Rational::from_integer(BigInt::from(0)) {
        return Err(usage("beta must be positive"));
    }
    let width = (&stop - &start) / Rational::from_integer(BigInt::from(steps));
    Ok((0..=steps)
        .map(|k| &start + &width * Rational::from_integer(BigInt::from(k)))
        .collect())
}

fn condensate<S: Backend>(
    file: &SpectrumFile,
    mode: Mode,
    n: usize,
    grid: &[InverseTemperature],
    format: FormatArg,
) -> Result<Output, CliError> {
    let levels = file.level_set(mode)?;
    let points = parallel::condensate_curve::<S>(&levels, n, grid)?;
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table::new(["beta", "condensate_fraction"]);
            for p in &points {
                t.push(vec![
                    inverse_temperature_csv(&p.beta),
                    linear_csv(&p.fraction),
                ]);
            }
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(json!({
            "mode": mode_name(S::MODE),
            "N": n,
            "points": points
                .iter()
                .map(|p| json!({ "beta": inverse_temperature_json(&p.beta), "condensate_fraction": value_json(&p.fraction) }))
                .collect::<Vec<_>>(),
        })),
    })
}

fn sample<S: Backend>(
    file: &SpectrumFile,
    n: usize,
    count: usize,
    seed: u64,
    format: FormatArg,
) -> Result<Output, CliError> {
    let w: WeightVector<S> = file.weights()?;
    let samples = Sampler::new(&w, n).sample_many(seed, count);
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table {
                comments: vec![
                    format!("seed={seed}"),
                    format!("algorithm={SAMPLER_ALGORITHM}"),
                ],
                ..Table::default()
            };
            t.header.push("sample".into());
            t.header.extend((0..w.len()).map(|i| format!("n_{i}")));
            for (k, s) in samples.iter().enumerate() {
                let mut row = vec![k.to_string()];
                row.extend(s.iter().map(|x| x.to_string()));
                t.push(row);
            }
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(json!({
            "seed": seed,
            "algorithm": SAMPLER_ALGORITHM,
            "N": n,
            "samples": samples,
        })),
    })
}

pub fn parse_caps(spec: &str) -> Result<CapVector, CliError> {
    let caps = spec
        .split('+')
        .map(|c| c.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "--caps {spec:?}: expected positive integers joined by '+'"
            ))
        })?;
    CapVector::new(caps).map_err(CliError::from)
}

fn count(caps: &str, m: Option<i64>, format: FormatArg) -> Result<Output, CliError> {
    let p = parse_caps(caps)?;
    let ms: Vec<i64> = match m {
        Some(m) => vec![m],
        None => (0..=p.total() as i64).collect(),
    };
    let label = p.to_string();
    let rows: Vec<(i64, String)> = ms
        .iter()
        .map(|&m| (m, count_bounded(&p, m).to_string()))
        .collect();
    Ok(match format {
        FormatArg::Csv => {
            let mut t = Table::new(["p", "m", "count"]);
            for (m, c) in rows {
                t.push(vec![label.clone(), m.to_string(), c]);
            }
            Output::Csv(t)
        }
        FormatArg::Json => Output::Json(Value::Array(
            rows.into_iter()
                .map(|(m, c)| json!({ "p": label, "m": m, "count": c }))
                .collect(),
        )),
    })
}

fn campaign<S: Backend>(config: &CampaignConfig) -> Result<CampaignSummary, CliError> {
    Ok(parallel::run_campaign::<S>(config)?)
}

/// Lemma up to `nmax`, the theorem at every `N` in `1..=nmax`, and the
/// identities at `nmax`. Extra and superset weights come from `seed` unless
/// given.
fn verify_spectrum<S: Backend>(
    file: &SpectrumFile,
    nmax: usize,
    seed: u64,
    extras: Option<Vec<Rational>>,
) -> Result<CampaignSummary, CliError> {
    let w: WeightVector<S> = file.weights()?;
    let defaults = CampaignConfig::default();
    let (random_extras, additions) = random_extensions(
        seed,
        defaults.extra_weights,
        defaults.superset_levels,
        defaults.max_entry,
    );
    let extras = extras.unwrap_or(random_extras);
    let extra_values = extras
        .iter()
        .map(S::from_rational)
        .collect::<Result<Vec<S>, _>>()?;
    let mut large = w.clone();
    for a in &additions {
        large = large.add_level(S::from_rational(a)?)?;
    }
    let system = if file.has_levels() {
        TheoremSystem::Levels(file.level_set(S::MODE)?)
    } else {
        TheoremSystem::Weights(w.clone())
    };
    let descriptor = match &system {
        TheoremSystem::Levels(levels) => SystemDescriptor::Levels(levels.clone()),
        TheoremSystem::Weights(w) => {
            SystemDescriptor::Weights(w.iter().map(Backend::to_scalar).collect())
        }
    };
    let verifier = Verifier::<S>::new();
    let instance_at = |id: usize| {
        Arc::new(Instance {
            id: id as u64,
            seed: Some(seed),
            system: descriptor.clone(),
            extra_weights: extra_values.iter().map(Backend::to_scalar).collect(),
            superset: Some(large.iter().map(Backend::to_scalar).collect()),
        })
    };
    let options = TheoremOptions {
        extra_weights: extra_values.clone(),
        superset: Some(large.clone()),
        beta_derivative: false,
    };

    let mut reports = verifier.lemma(&w, nmax, &instance_at(0))?;
    let per_n = (1..=nmax)
        .into_par_iter()
        .map(|n| verifier.theorem(&system, n, &options, &instance_at(n)))
        .collect::<Result<Vec<_>, _>>()?;
    reports.extend(per_n.into_iter().flatten());
    reports.extend(verifier.identities(&w, nmax, &instance_at(nmax))?);
    Ok(CampaignSummary::new(seed, 1, reports))
}

fn verify_outcome(summary: &CampaignSummary, format: FormatArg, failures_only: bool) -> Outcome {
    let counts = summary.counts();
    let output = match format {
        FormatArg::Csv => {
            let mut t = counts_table(&counts);
            t.comments.push(format!("seed={}", summary.seed));
            Output::Csv(t)
        }
        FormatArg::Json => {
            let reports: Vec<Value> = summary
                .reports
                .iter()
                .filter(|r| !failures_only || r.verdict == bosecanon_core::verify::Verdict::Fail)
                .map(report_json)
                .collect();
            Output::Json(json!({
                "seed": summary.seed,
                "instances": summary.instances,
                "fail_count": summary.fail_count(),
                "summary": counts_json(&counts),
                "reports": reports,
            }))
        }
    };
    Outcome {
        output,
        failed: !summary.passed(),
    }
}

fn decompose<S: Backend>(
    file: &SpectrumFile,
    n: usize,
    level: Option<usize>,
) -> Result<Vec<VerificationReport>, CliError> {
    let w: WeightVector<S> = file.weights()?;
    if let Some(i) = level {
        w.check_index(i)?;
    }
    let instance = Arc::new(Instance::weights(0, &w));
    let reports = Verifier::<S>::new().identities(&w, n, &instance)?;
    Ok(reports
        .into_iter()
        .filter(|r| match r.claim {
            bosecanon_core::verify::Claim::Eq5 => level.is_none_or(|i| r.location.indices == [i]),
            bosecanon_core::verify::Claim::Eq13Product => true,
            _ => false,
        })
        .collect())
}
