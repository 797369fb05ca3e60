//! Verification reports and ad-hoc queries for `werner-maps`.
//!
//! The binary is a thin wrapper; everything it prints is built here so the
//! acceptance tests can call the same checks directly.

pub mod commands;
pub mod report;
pub mod suite;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::commands::{parse_lambda, UsageError};
use crate::report::{Format, Report};
use crate::suite::{run_dimension, SuiteConfig};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED_2009;

/// Samples per randomized check when `--samples` is not given.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "werner",
    version,
    about = "Separable U⊗U-covariant maps and Werner states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every verification check for the given dimensions.
    Verify(VerifyArgs),
    /// Classify a map given by its four weights.
    Classify(ClassifyArgs),
    /// Apply a map to a Werner state.
    Apply(ApplyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Also write the report to this directory.
    #[arg(long, env = "WERNER_REPORT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Include wall time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Local dimensions, comma separated, each in 2..=5.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_dim)]
    pub dim: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Weights λ1,λ2,λ3,λ4 on Â⊗Â, Â⊗Ŝ, Ŝ⊗Â, Ŝ⊗Ŝ.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub lambda: Vec<f64>,
    #[arg(long, value_parser = parse_dim)]
    pub dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub lambda: Vec<f64>,
    /// Werner parameter of the input, in [0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, value_parser = parse_dim)]
    pub dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_dim(s: &str) -> Result<usize, String> {
    let d: usize = s
        .trim()
        .parse()
        .map_err(|_| format!("not a dimension: {s:?}"))?;
    if (2..=5).contains(&d) {
        Ok(d)
    } else {
        Err(format!("dimension must be in 2..=5, got {d}"))
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Runs a parsed command and returns the report with the format to print.
pub fn execute(cli: &Cli) -> Result<(Report, &OutputArgs), UsageError> {
    let start = Instant::now();
    let (mut report, output) = match &cli.command {
        Command::Verify(a) => {
            let mut dims = a.dim.clone();
            dims.sort_unstable();
            dims.dedup();
            let cfg = SuiteConfig {
                samples: a.samples,
                seed: a.seed,
            };
            let command = format!(
                "verify --dim {} --samples {} --seed {}",
                join(&dims),
                a.samples,
                a.seed
            );
            let mut report = Report::new(command, dims.clone(), Some(a.seed));
            let per_dim: Vec<_> = dims.par_iter().map(|&d| run_dimension(d, cfg)).collect();
            per_dim.into_iter().flatten().for_each(|c| report.push(c));
            (report, &a.output)
        }
        Command::Classify(a) => {
            let input = parse_lambda(&a.lambda)?;
            warn_normalized(&input);
            let command = format!("classify --lambda {} --dim {}", join(&a.lambda), a.dim);
            let mut report = Report::new(command, vec![a.dim], None);
            let value = commands::classify(&input, a.dim).map_err(|e| UsageError(e.to_string()))?;
            report.result = Some(value);
            (report, &a.output)
        }
        Command::Apply(a) => {
            let input = parse_lambda(&a.lambda)?;
            if !(0.0..=1.0).contains(&a.nu) {
                return Err(UsageError(format!("--nu must lie in [0, 1], got {}", a.nu)));
            }
            warn_normalized(&input);
            let command = format!(
                "apply --lambda {} --nu {} --dim {}",
                join(&a.lambda),
                a.nu,
                a.dim
            );
            let mut report = Report::new(command, vec![a.dim], None);
            let applied =
                commands::apply(&input, a.nu, a.dim).map_err(|e| UsageError(e.to_string()))?;
            applied.checks.into_iter().for_each(|c| report.push(c));
            report.result = Some(applied.result);
            (report, &a.output)
        }
    };
    if output.timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok((report, output))
}

fn warn_normalized(input: &commands::LambdaInput) {
    if input.normalized() {
        eprintln!(
            "warning: lambda sums to {}, normalized to {:?}",
            input.input_sum,
            input.lambda.as_array()
        );
    }
}

/// Writes `<out_dir>/<command>.<ext>`.
pub fn write_report(
    dir: &std::path::Path,
    name: &str,
    format: Format,
    body: &str,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    std::fs::write(&path, body)?;
    Ok(path)
}
