//! `forge`: command-line front end for the reasonforge pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reasonforge::metrics::Strategy;
use reasonforge::CodeLanguage;

#[derive(Parser)]
#[command(name = "forge", version, about = "Build and evaluate code-reasoning datasets")]
struct Cli {
    /// Log filter, e.g. `info` or `reasonforge=debug`. Defaults to $FORGE_LOG or `warn`.
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage of a configured pipeline.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Rerun steps even when their manifests are still valid.
        #[arg(long)]
        fresh: bool,
    },
    /// Fuzzy de-duplication of questions.
    Dedup(StageArgs<DedupFlags>),
    /// Remove questions equivalent to benchmark items.
    Decontaminate(StageArgs<DecontamFlags>),
    /// Sample solutions for every question.
    Generate(StageArgs<GenerateFlags>),
    /// Parse and filter raw solutions or critiques.
    Postprocess(StageArgs<PostprocessFlags>),
    /// Sample one critique per accepted solution.
    Critique(StageArgs<CritiqueFlags>),
    /// Run accepted solutions against their unit tests.
    Execute(StageArgs<ExecFlags>),
    /// Compute pass@k, selection and critique accuracy.
    Evaluate(StageArgs<ReportFlags>),
    /// Join solutions, critiques and execution results into the dataset.
    Dataset {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the run's evaluate/dataset.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Corpus(CorpusCommand),
    #[command(subcommand)]
    Exec(ExecCommand),
    #[command(subcommand)]
    Metrics(MetricsCommand),
    #[command(subcommand)]
    Bench(BenchCommand),
}

/// Either `--config` (run the step inside a configured pipeline) or the
/// explicit flags.
#[derive(Args)]
struct StageArgs<T: Args> {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: T,
}

#[derive(Subcommand)]
enum CorpusCommand {
    Dedup(DedupFlags),
    Decontaminate(DecontamFlags),
}

#[derive(Subcommand)]
enum ExecCommand {
    Run(ExecFlags),
}

#[derive(Subcommand)]
enum MetricsCommand {
    Report(ReportFlags),
    Curves(CurvesFlags),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Schema-check a benchmark file and print venue and date counts.
    Validate(BenchValidateFlags),
    /// Write the driver program for a starter-code record.
    Harness(HarnessFlags),
}

#[derive(Args)]
struct DedupFlags {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum JudgeArg {
    Fuzzy,
}

#[derive(Args)]
struct DecontamFlags {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Benchmark items JSONL (`benchmark`, `id`, `statement`).
    #[arg(long)]
    bench: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    screen: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    verdicts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fuzzy")]
    judge: JudgeArg,
}

#[derive(Args)]
struct ProviderFlags {
    /// HTTP provider profile; without it the mock provider is used.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Scripted responses for the mock provider.
    #[arg(long)]
    mock_script: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    in_flight: usize,
}

#[derive(Args)]
struct GenerateFlags {
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "lang", value_delimiter = ',', default_value = "python,cpp")]
    languages: Vec<CodeLanguage>,
    #[arg(long, default_value_t = 8)]
    n_samples: u32,
    #[command(flatten)]
    provider: ProviderFlags,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PostprocessKind {
    Solutions,
    Critiques,
}

#[derive(Args)]
struct PostprocessFlags {
    #[arg(long, value_enum, default_value = "solutions")]
    kind: PostprocessKind,
    /// Raw records from `generate` or `critique`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rejections: Option<PathBuf>,
}

#[derive(Args)]
struct CritiqueFlags {
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long)]
    solutions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderFlags,
}

#[derive(Args)]
struct ExecFlags {
    #[arg(long)]
    solutions: Option<PathBuf>,
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Per-test wall-clock limit, seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Parallel evaluations; 0 means one per logical core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Shortest,
    Random,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Shortest => Strategy::Shortest,
            StrategyArg::Random => Strategy::Random,
        }
    }
}

#[derive(Args)]
struct ReportFlags {
    /// Sample pools JSONL.
    #[arg(long)]
    pools: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value = "shortest")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 100)]
    resamples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesFlags {
    #[arg(long)]
    pools: PathBuf,
    #[arg(long, default_value_t = 100)]
    k_max: usize,
    #[arg(long, value_enum, default_value = "shortest")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 100)]
    resamples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchValidateFlags {
    #[arg(long = "in")]
    input: PathBuf,
    /// Skip invalid records instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Inclusive YYMM range to count, e.g. `--from 2408 --to 2502`.
    #[arg(long, requires = "to")]
    from: Option<u32>,
    #[arg(long, requires = "from")]
    to: Option<u32>,
}

#[derive(Args)]
struct HarnessFlags {
    /// Benchmark JSONL holding the record.
    #[arg(long)]
    bench: PathBuf,
    #[arg(long)]
    record: String,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    lang: CodeLanguage,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = cli.log.clone().or_else(|| std::env::var("FORGE_LOG").ok()).unwrap_or_else(|| "warn".into());
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(filter))
        .with_writer(std::io::stderr)
        .init();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
