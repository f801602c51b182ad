//! `claimbridge` command-line front end.
//!
//! Exit codes: 0 on success, 1 for validation and runtime failures, 2 for
//! usage errors (reported by clap).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use claimbridge::evaluation::Task;

#[derive(Parser, Debug)]
#[command(name = "claimbridge", version, about = "Cross-lingual political claim identification and categorization")]
pub struct Cli {
    /// Run directory root. Defaults to the config file's `run_dir` for
    /// `grid`, and to `runs` otherwise.
    #[arg(long, global = true)]
    pub run_dir: Option<PathBuf>,
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Disable data-parallel execution.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a JSONL corpus and store it in the run directory.
    Ingest(IngestArgs),
    /// Corpus statistics and category distribution.
    Stats(StatsArgs),
    /// Document-level train/dev/test split.
    Split(SplitArgs),
    /// Translate a corpus sentence by sentence.
    Translate(TranslateArgs),
    /// Sample a compatible test set from a candidate pool.
    SampleTestset(SampleArgs),
    /// Train a claim identifier or categorizer.
    Train(TrainArgs),
    /// Evaluate a trained model on a corpus.
    Evaluate(EvaluateArgs),
    /// Error analysis: saliency, lexical cues, misclassification overlap.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run an experiment grid described by a TOML config.
    Grid(GridArgs),
    /// Render the result table of the experiments stored in the run directory.
    Report(ReportArgs),
    /// Write synthetic corpora for demos and tests.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct CorpusArg {
    /// Corpus file (JSONL, one document per line).
    pub corpus: PathBuf,
    /// Codebook JSON; defaults to the built-in eight top-level categories.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    /// Name under `corpora/`; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    /// Second corpus to compare category distributions against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SplitOptions {
    /// Train, dev and test shares.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.1, 0.1])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    #[command(flatten)]
    pub split: SplitOptions,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    /// Target language.
    #[arg(long)]
    pub to: String,
    /// Backend id: `identity`, or one declared in `--config` or `--dictionary`.
    #[arg(long, default_value = "identity")]
    pub backend: String,
    /// Grid config whose `[backends]` are available.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dictionary backend JSON, registered as `dictionary`.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Translate to the target and back (round trip).
    #[arg(long)]
    pub back: bool,
    /// Output path; defaults to `corpora/<stem>.<to>.jsonl` in the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Reference corpus whose monthly distribution is matched.
    #[arg(long)]
    pub reference: PathBuf,
    /// Candidate articles (JSONL documents, claims optional).
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub keywords: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub actors: Vec<String>,
    #[arg(long, default_value_t = 36)]
    pub size: usize,
    #[arg(long, default_value_t = 7)]
    pub window_days: u32,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Name under `corpora/`.
    #[arg(long, default_value = "testset")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    #[value(alias = "id")]
    Identification,
    #[value(alias = "cat")]
    Categorization,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Identification => Task::Identification,
            TaskArg::Categorization => Task::Categorization,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncoderArg {
    Mono,
    Multilingual,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum, default_value = "mono")]
    pub encoder: EncoderArg,
    /// Token alignment JSON (`{"word": "anchor"}`) for the multilingual encoder.
    #[arg(long)]
    pub alignment: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub warmup_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub split: SplitOptions,
    /// Checkpoint name under `checkpoints/`.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    All,
    Train,
    Dev,
    Test,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Checkpoint file.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: CorpusArg,
    /// Which part of the corpus to score.
    #[arg(long, value_enum, default_value = "all")]
    pub partition: PartitionArg,
    #[command(flatten)]
    pub split: SplitOptions,
    /// Write per-sentence predictions (JSONL) here.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Token saliency of one sentence.
    Saliency {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: String,
        /// Label to explain; `claim` (or `no_claim`) for identifiers.
        #[arg(long)]
        target: Option<String>,
    },
    /// Cue frequency among false positives vs false negatives.
    Cues {
        /// Identification predictions (JSONL with text, gold, label).
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        patterns: Vec<String>,
    },
    /// Overlap of two models' misclassifications on the same test set.
    Overlap {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Monte Carlo trials for the random baseline (0 disables).
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Grid config file (TOML).
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Override the translation backend of every experiment.
    #[arg(long)]
    pub backend: Option<String>,
    /// Print the table as CSV.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    /// German source and English target corpora with a lexicon between them.
    Bilingual,
    /// Large single-outlet German corpus with realistic label statistics.
    Debatenet,
    /// Small English corpus with realistic label statistics.
    Guardian,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: Synthetic,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub source_documents: Option<usize>,
    #[arg(long)]
    pub target_documents: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let out = output::Output::new(cli.json);
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            out.error(&e);
            ExitCode::from(1)
        }
    }
}
