//! `crowdinfer` command-line tool.

mod commands;
mod fetch;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crowdinfer::methods::{Method, Metric};

#[derive(Parser)]
#[command(name = "crowdinfer", version, about = "Truth inference for crowdsourced annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate responses with one method.
    Aggregate(AggregateArgs),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Annotation-quality estimates for a categorical response file.
    Metrics(MetricsArgs),
    /// Run a method × dataset grid from a JSON config.
    Bench(BenchArgs),
    /// Download a catalog dataset and verify its checksums.
    Fetch(FetchArgs),
}

#[derive(Args)]
struct Columns {
    #[arg(long, default_value = "task")]
    task_col: String,
    #[arg(long, default_value = "worker")]
    worker_col: String,
    #[arg(long, default_value = "label")]
    label_col: String,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Responses: CSV/TSV/JSONL table, or a mask index CSV for segmentation methods.
    #[arg(long)]
    input: PathBuf,
    /// Labels, scores or texts CSV; for segmentation, the output mask index.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Method parameters as key=value.
    #[arg(long, num_args = 1.., value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Also write per-task posteriors (categorical methods that produce them).
    #[arg(long)]
    posteriors: Option<PathBuf>,
    /// Also write worker skills or parameters.
    #[arg(long)]
    skills: Option<PathBuf>,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_parser = parse_metric)]
    metric: Metric,
    /// Output of `aggregate`.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Write `metric,value` CSV here as well as to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    kind: SynthKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    OneCoin,
    Confusion,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Ellipse,
    Rect,
}

#[derive(Subcommand)]
enum SynthKind {
    /// Categorical crowd with per-worker skills.
    Categorical {
        #[arg(long)]
        n_tasks: usize,
        #[arg(long)]
        n_workers: usize,
        #[arg(long, default_value_t = 5)]
        per_task: usize,
        #[arg(long, default_value_t = 2)]
        n_labels: usize,
        /// Skills ~ Beta(a, b), given as `a,b`.
        #[arg(long, value_parser = parse_pair, conflicts_with = "skill_fixed")]
        skill_beta: Option<(f64, f64)>,
        /// Every worker has this skill.
        #[arg(long)]
        skill_fixed: Option<f64>,
        #[arg(long, value_enum, default_value = "one-coin")]
        model: ModelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise comparisons of latent item scores.
    Pairwise {
        #[arg(long)]
        n_items: usize,
        #[arg(long)]
        n_workers: usize,
        #[arg(long)]
        n_comparisons: usize,
        #[arg(long, default_value_t = 0.0)]
        worker_noise: f64,
        /// Evenly spaced scores `i * step` instead of N(0, 1).
        #[arg(long)]
        score_step: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corrupted transcriptions of random reference sentences.
    Sequence {
        #[arg(long)]
        n_tasks: usize,
        #[arg(long)]
        n_workers: usize,
        #[arg(long, default_value_t = 0.1)]
        error_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noisy binary masks of random shapes.
    Segmentation {
        #[arg(long)]
        n_tasks: usize,
        #[arg(long)]
        n_workers: usize,
        #[arg(long, value_enum, default_value = "ellipse")]
        shape: ShapeArg,
        #[arg(long, default_value_t = 0.1)]
        flip_rate: f64,
        #[arg(long, default_value_t = 1)]
        morph: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    /// `(worker, skill)` CSV used to weight the uncertainty estimate.
    #[arg(long)]
    skills: Option<PathBuf>,
    /// Write per-task `(task, entropy)` CSV here.
    #[arg(long)]
    uncertainty_out: Option<PathBuf>,
    /// Write the `metric,value` CSV here as well as to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Overrides the config's `parallelism`.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Overrides the config's `output` directory (default `<config stem>-report`).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FetchArgs {
    /// Catalog entry name.
    name: String,
    /// Destination directory.
    #[arg(long)]
    dir: PathBuf,
    /// Base URL, overriding the catalog's.
    #[arg(long)]
    url: Option<String>,
    /// Catalog JSON to use instead of the built-in one.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: crowdinfer::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: crowdinfer::Error| e.to_string())
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s.split_once('=').ok_or("expected key=value")?;
    let value = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((key.to_owned(), value))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok((num(a)?, num(b)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Synth(a) => commands::synth(a.kind),
        Command::Metrics(a) => commands::metrics(a),
        Command::Bench(a) => commands::bench(a),
        Command::Fetch(a) => fetch::fetch(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_method_error() { 1 } else { 2 })
        }
    }
}
