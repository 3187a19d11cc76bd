//! `satmetric` command-line frontend.
//!
//! Exit codes: 0 success, 1 bad data (rejected rows, failed strict gate,
//! invalid documents), 2 usage errors (bad flags, unreadable paths).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use satmetric_core::ingest::{MissingPolicy, ResponseKind};
use satmetric_core::kano::KanoMultipliers;
use satmetric_core::psychometrics::{VarianceMode, DEFAULT_ALPHA_THRESHOLD};
use satmetric_core::report::Format;
use satmetric_core::rootcause::DEFAULT_PARETO_THRESHOLD;
use satmetric_core::servqual::DEFAULT_WEIGHT_TOLERANCE;
use thiserror::Error;

mod commands;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "satmetric", version, about = "Service-quality survey analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check response files against an instrument and report row-level errors.
    Validate(ValidateArgs),
    /// Per-item means and variances of one Likert survey, as CSV.
    Descriptives(DescriptivesArgs),
    /// Cronbach's alpha and omitted-item statistics, as JSON.
    Reliability(ReliabilityArgs),
    /// Full gap pipeline: reliability, gaps, Kano priorities, Pareto and report files.
    Gap(GapArgs),
    /// Technical importance weights of a house-of-quality definition, as CSV.
    Qfd(QfdArgs),
    /// Generate a Likert response file whose item means equal given targets.
    Synth(SynthArgs),
    /// Re-emit report files from a saved JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instrument: PathBuf,
    #[arg(long)]
    pub expect: Option<PathBuf>,
    #[arg(long)]
    pub perceive: Option<PathBuf>,
    #[arg(long)]
    pub importance: Option<PathBuf>,
}

/// Exactly one of `--expect` and `--perceive`.
#[derive(Debug, Args)]
pub struct SurveyArgs {
    #[arg(long)]
    pub instrument: PathBuf,
    #[arg(long, required_unless_present = "perceive", conflicts_with = "perceive")]
    pub expect: Option<PathBuf>,
    #[arg(long)]
    pub perceive: Option<PathBuf>,
    #[arg(long, default_value = "drop_row")]
    pub missing_policy: MissingPolicy,
}

#[derive(Debug, Args)]
pub struct DescriptivesArgs {
    #[command(flatten)]
    pub survey: SurveyArgs,
    #[arg(long, default_value = "population")]
    pub variance: VarianceMode,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    #[command(flatten)]
    pub survey: SurveyArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA_THRESHOLD)]
    pub alpha_threshold: f64,
    /// Exit 1 when alpha does not exceed the threshold.
    #[arg(long)]
    pub strict_gate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "weights_source", required = true, multiple = false, args = ["importance", "weights"])]
pub struct GapArgs {
    #[arg(long)]
    pub instrument: PathBuf,
    #[arg(long)]
    pub expect: PathBuf,
    #[arg(long)]
    pub perceive: PathBuf,
    /// Importance allocation CSV (100 points per respondent).
    #[arg(long)]
    pub importance: Option<PathBuf>,
    /// Dimension weights as JSON, keyed by dimension.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value = "population")]
    pub variance: VarianceMode,
    #[arg(long, default_value_t = DEFAULT_ALPHA_THRESHOLD)]
    pub alpha_threshold: f64,
    /// Refuse to score when either survey fails the reliability gate.
    #[arg(long)]
    pub strict_gate: bool,
    #[arg(long, default_value_t = KanoMultipliers::default())]
    pub kano_multipliers: KanoMultipliers,
    #[arg(long, default_value_t = DEFAULT_PARETO_THRESHOLD)]
    pub pareto_threshold: f64,
    /// Rank dissatisfaction by |gap| alone instead of |gap| * I_d.
    #[arg(long)]
    pub pareto_unweighted: bool,
    /// Rescale importance means to sum to exactly 100.
    #[arg(long)]
    pub normalize_weights: bool,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_TOLERANCE)]
    pub weight_tolerance: f64,
    #[arg(long)]
    pub hoq: Option<PathBuf>,
    #[arg(long)]
    pub fishbone: Option<PathBuf>,
    #[arg(long, default_value = "drop_row")]
    pub missing_policy: MissingPolicy,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output stem; files are written as `<stem>.report.json`, `<stem>.tables/`, ...
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json,csv,markdown,svg-charts")]
    pub format: Vec<Format>,
    /// Leave the generation time out of the report metadata.
    #[arg(long)]
    pub suppress_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct QfdArgs {
    #[arg(long)]
    pub hoq: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub instrument: PathBuf,
    #[arg(long)]
    pub kind: ResponseKind,
    /// CSV with `item_id,mean` columns.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub from: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `argv` (including the program name) and runs one command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("satmetric: {f}");
            f.exit_code()
        }
    }
}
