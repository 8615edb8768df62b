//! Command-line front end.
//!
//! Reports go to standard output, logs to standard error. Exit status is
//! 0 when every check passes, 1 when an inequality check fails (the report
//! is still written), and 2 on usage, input or precondition errors (an
//! error object is written instead of a report).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{
    contour_closed_form, contour_integral_check, lemma_inverse_bound, log_gap_bound,
    theorem_power_bound, verify_inverse_inequality, verify_log_inequality, verify_power_inequality,
};
use crate::harness::{run_suite, sharpness_sweep, EnsembleSpec, DEFAULT_R_GRID};
use crate::linalg::{opnorm, ToleranceConfig};
use crate::matfun::{apply_spectral, frac_power_quad, log_via_limit};
use crate::quadrature::QuadratureConfig;
use crate::report::{
    read_matrix, BoundsTable, ErrorReport, MatrixFile, MatrixResult, Report, SharpnessTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum VerifyKind {
    #[default]
    Power,
    Inverse,
    Log,
}

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Operator monotone matrix functions and Löwner–Heinz gap bounds")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,

    /// PSD tolerance, relative to 1 + norm of the compared matrix.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = parse_positive)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// A^r by quadrature of the resolvent integral.
    Power {
        #[arg(long = "a")]
        a: PathBuf,
        #[arg(long, value_parser = parse_r_closed)]
        r: f64,
    },
    /// n (A^{1/n} - I) and its distance to log A.
    Log {
        #[arg(long = "a")]
        a: PathBuf,
        #[arg(long = "n-limit", default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
        n_limit: u64,
    },
    /// Check one gap inequality on the pair (A, B).
    Verify {
        #[arg(long = "a")]
        a: PathBuf,
        #[arg(long = "b")]
        b: PathBuf,
        #[arg(long, default_value_t = 0.5, value_parser = parse_r_closed)]
        r: f64,
        #[arg(long, value_enum, default_value_t = VerifyKind::Power)]
        kind: VerifyKind,
    },
    /// All closed-form bounds for scalar ||A||, m, r.
    Bounds(ScalarArgs),
    /// Seeded ensemble run of the power, inverse and log checks.
    Suite(SuiteArgs),
    /// Scalar equality sweep.
    Sharpness {
        #[arg(long = "a-grid", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0, 10.0, 100.0])]
        a_grid: Vec<f64>,
        #[arg(long = "gap-grid", value_delimiter = ',', default_values_t = [0.01, 0.1, 0.5, 1.0, 3.0])]
        gap_grid: Vec<f64>,
        #[arg(long = "r-grid", value_delimiter = ',', default_values_t = DEFAULT_R_GRID, value_parser = parse_r_closed)]
        r_grid: Vec<f64>,
    },
    /// Closed form of the keyhole integral against quadrature.
    Contour {
        #[arg(long = "norm-a", value_parser = parse_positive)]
        norm_a: f64,
        #[arg(long, value_parser = parse_positive)]
        m: f64,
        #[arg(long, value_parser = parse_r_open)]
        r: f64,
    },
}

#[derive(Debug, Args)]
struct ScalarArgs {
    #[arg(long = "norm-a", value_parser = parse_positive)]
    norm_a: f64,
    #[arg(long, value_parser = parse_positive)]
    m: f64,
    #[arg(long, default_value_t = 0.5, value_parser = parse_r_closed)]
    r: f64,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Dimension range MIN:MAX.
    #[arg(long, default_value = "1:50", value_parser = parse_dims)]
    dims: (usize, usize),
    /// Gap range MIN:MAX.
    #[arg(long, default_value = "0.001:10", value_parser = parse_pos_range)]
    gaps: (f64, f64),
    /// Spectrum range of B, MIN:MAX.
    #[arg(long, default_value = "0.001:1000", value_parser = parse_pos_range)]
    eigs: (f64, f64),
    #[arg(long = "r-grid", value_delimiter = ',', default_values_t = DEFAULT_R_GRID, value_parser = parse_r_closed)]
    r_grid: Vec<f64>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("'{s}' is not a decimal number"))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive and finite"))
    }
}

fn parse_r_closed(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} outside the valid interval (0, 1]"))
    }
}

fn parse_r_open(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} outside the valid interval (0, 1)"))
    }
}

fn split_range(s: &str) -> Result<(&str, &str), String> {
    s.split_once(':')
        .ok_or_else(|| format!("'{s}' is not of the form MIN:MAX"))
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = split_range(s)?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad minimum in '{s}'"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad maximum in '{s}'"))?;
    if lo >= 1 && lo <= hi && hi <= crate::linalg::MAX_DIM {
        Ok((lo, hi))
    } else {
        Err(format!("'{s}' must satisfy 1 <= MIN <= MAX <= 512"))
    }
}

fn parse_pos_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = split_range(s)?;
    let (lo, hi) = (parse_positive(lo)?, parse_positive(hi)?);
    if lo <= hi {
        Ok((lo, hi))
    } else {
        Err(format!("'{s}' must satisfy MIN <= MAX"))
    }
}

/// Parsed invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub tol: ToleranceConfig,
    pub quad: QuadratureConfig,
    pub output_format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Power { a: PathBuf, r: f64 },
    Log { a: PathBuf, n_limit: u64 },
    Verify { a: PathBuf, b: PathBuf, r: f64, kind: VerifyKind },
    Bounds { norm_a: f64, m: f64, r: f64 },
    Suite(EnsembleSpec),
    Sharpness { a_grid: Vec<f64>, gap_grid: Vec<f64>, r_grid: Vec<f64> },
    Contour { norm_a: f64, m: f64, r: f64 },
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let command = match cli.command {
        CommandArgs::Power { a, r } => Command::Power { a, r },
        CommandArgs::Log { a, n_limit } => Command::Log { a, n_limit },
        CommandArgs::Verify { a, b, r, kind } => Command::Verify { a, b, r, kind },
        CommandArgs::Bounds(s) => Command::Bounds {
            norm_a: s.norm_a,
            m: s.m,
            r: s.r,
        },
        CommandArgs::Suite(s) => Command::Suite(EnsembleSpec {
            seed: s.seed,
            trials: s.trials as usize,
            dim_range: s.dims,
            gap_range: s.gaps,
            eig_range: s.eigs,
            r_grid: s.r_grid,
        }),
        CommandArgs::Sharpness {
            a_grid,
            gap_grid,
            r_grid,
        } => Command::Sharpness {
            a_grid,
            gap_grid,
            r_grid,
        },
        CommandArgs::Contour { norm_a, m, r } => Command::Contour { norm_a, m, r },
    };
    Ok(RunConfig {
        command,
        tol: ToleranceConfig {
            psd_tol: cli.tol,
            relative: true,
        },
        quad: QuadratureConfig::default(),
        output_format: cli.format,
    })
}

/// Exit status plus the text destined for standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: u8,
    pub output: String,
}

fn render<R: Report>(report: &R, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    }
}

fn emit<R: Report>(report: &R, format: OutputFormat, ok: bool) -> Outcome {
    Outcome {
        status: if ok { 0 } else { 1 },
        output: render(report, format),
    }
}

fn fail(error: String, path: Option<String>, format: OutputFormat) -> Outcome {
    eprintln!("error: {error}");
    Outcome {
        status: 2,
        output: render(&ErrorReport { error, path }, format),
    }
}

macro_rules! attempt {
    ($expr:expr, $fmt:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => return fail(e.to_string(), None, $fmt),
        }
    };
}

macro_rules! load {
    ($path:expr, $fmt:expr) => {
        match read_matrix($path) {
            Ok(m) => m,
            Err(e) => return fail(e.to_string(), Some(e.path().to_string()), $fmt),
        }
    };
}

pub fn run(config: &RunConfig) -> Outcome {
    let fmt = config.output_format;
    let tol = &config.tol;
    match &config.command {
        Command::Power { a, r } => {
            let a = load!(a, fmt);
            let result = attempt!(frac_power_quad(&a, *r, &config.quad), fmt);
            let oracle = attempt!(apply_spectral(&a, "t^r", |t| t.powf(*r)), fmt);
            let distance = attempt!(opnorm(&attempt!(result.sub(&oracle), fmt)), fmt);
            let report = MatrixResult {
                command: "power".into(),
                r: Some(*r),
                n_limit: None,
                result: MatrixFile::from(&result),
                oracle_distance: distance,
            };
            emit(&report, fmt, true)
        }
        Command::Log { a, n_limit } => {
            let a = load!(a, fmt);
            let result = attempt!(log_via_limit(&a, *n_limit), fmt);
            let oracle = attempt!(apply_spectral(&a, "log", f64::ln), fmt);
            let distance = attempt!(opnorm(&attempt!(result.sub(&oracle), fmt)), fmt);
            let report = MatrixResult {
                command: "log".into(),
                r: None,
                n_limit: Some(*n_limit),
                result: MatrixFile::from(&result),
                oracle_distance: distance,
            };
            emit(&report, fmt, true)
        }
        Command::Verify { a, b, r, kind } => {
            let a = load!(a, fmt);
            let b = load!(b, fmt);
            let report = attempt!(
                match kind {
                    VerifyKind::Power => verify_power_inequality(&a, &b, *r, tol),
                    VerifyKind::Inverse => verify_inverse_inequality(&a, &b, tol),
                    VerifyKind::Log => verify_log_inequality(&a, &b, tol),
                },
                fmt
            );
            let ok = report.pass;
            emit(&report, fmt, ok)
        }
        Command::Bounds { norm_a, m, r } => {
            let (norm_a, m, r) = (*norm_a, *m, *r);
            let contour = (norm_a > m && r < 1.0).then(|| contour_closed_form(norm_a, m, r));
            let report = BoundsTable {
                norm_a,
                m,
                r,
                inverse: lemma_inverse_bound(norm_a, m).ok(),
                power: theorem_power_bound(norm_a, m, r).ok(),
                log: log_gap_bound(norm_a, m).ok(),
                contour_closed_form: contour,
            };
            emit(&report, fmt, true)
        }
        Command::Suite(spec) => {
            let report = attempt!(run_suite(spec, tol), fmt);
            eprintln!(
                "suite seed={} trials={}: {}/{} passed in {:.2}s",
                report.seed, report.trials, report.passed, report.total, report.runtime_secs
            );
            let ok = report.passed == report.total;
            emit(&report, fmt, ok)
        }
        Command::Sharpness {
            a_grid,
            gap_grid,
            r_grid,
        } => {
            let table = SharpnessTable::new(sharpness_sweep(a_grid, gap_grid, r_grid));
            let ok = table.all_sharp;
            emit(&table, fmt, ok)
        }
        Command::Contour { norm_a, m, r } => {
            let check = attempt!(contour_integral_check(*norm_a, *m, *r, &config.quad), fmt);
            emit(&check, fmt, true)
        }
    }
}
