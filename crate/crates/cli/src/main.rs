//! `drought-impact`: the end-to-end pipeline from raw reports to reviewed
//! predictions.

mod commands;
mod manifest;
mod predictions;
mod report;
mod review;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drought_impact::corpus::Format;
use drought_impact::Category;

#[derive(Parser)]
#[command(name = "drought-impact", version, about = "Drought-impact recognition for short texts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a labeled or unlabeled corpus and write it in normalized form.
    Ingest(IngestArgs),
    /// Attach cleaned text to every document.
    Clean(CleanArgs),
    /// Seeded train/validation/test split.
    Split(SplitArgs),
    /// Generate a synthetic corpus whose labels follow the keyword table.
    Synth(SynthArgs),
    /// Label documents with the keyword table, keeping those with a hit.
    KeywordLabel(KeywordLabelArgs),
    /// Fine-tune the classifier and save the best checkpoint.
    Train(TrainArgs),
    /// Probabilities and labels for every document.
    Predict(PredictArgs),
    /// Per-category, micro and macro metrics against reference labels.
    Evaluate(EvaluateArgs),
    /// Conditional label co-occurrence.
    Cooccur(CooccurArgs),
    /// Interactive adjudication of controversial documents for one category.
    Review(ReviewArgs),
    /// Markdown report with metrics, co-occurrence, review results and plots.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EncoderArg {
    Pretrained,
    Tiny,
}

#[derive(Args)]
pub struct IngestArgs {
    /// CSV, JSON lines, or plain text with one document per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Output format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Contraction map (two-column TSV) replacing the shipped one.
    #[arg(long)]
    pub contractions: Option<PathBuf>,
    #[arg(long)]
    pub drop_stopwords: bool,
    #[arg(long)]
    pub drop_numbers: bool,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving train, validation and test files.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.8, 0.1, 0.1])]
    pub ratios: Vec<f64>,
    /// Shuffle within groups of identical label vectors.
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of documents given a distractor keyword that contradicts their labels.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long)]
    pub keyword_table: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct KeywordLabelArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub keyword_table: Option<PathBuf>,
    /// Keep documents without any keyword (all-zero labels).
    #[arg(long)]
    pub keep_all: bool,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Labeled training documents.
    #[arg(long)]
    pub input: PathBuf,
    /// Labeled validation documents used to pick the best epoch.
    #[arg(long)]
    pub val: PathBuf,
    /// Checkpoint directory.
    #[arg(long)]
    pub output: PathBuf,
    /// Model configuration JSON; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub encoder: Option<EncoderArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub freeze_encoder: bool,
    /// Minimum word count for the tiny encoder's vocabulary.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Predictions as JSON lines.
    #[arg(long)]
    pub output: PathBuf,
    /// Defaults to the checkpoint's threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Documents carrying the reference labels.
    #[arg(long, alias = "input")]
    pub truth: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Metrics report (JSON).
    #[arg(long)]
    pub output: PathBuf,
    /// Also write per-category confusion counts as CSV.
    #[arg(long)]
    pub confusion_csv: Option<PathBuf>,
    /// Report macro metrics with these categories left out as well.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<Category>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "labels")]
pub struct LabelSource {
    /// Labeled documents.
    #[arg(long, group = "labels")]
    pub input: Option<PathBuf>,
    /// Predictions file.
    #[arg(long, group = "labels")]
    pub predictions: Option<PathBuf>,
}

#[derive(Args)]
pub struct CooccurArgs {
    #[command(flatten)]
    pub source: LabelSource,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct ReviewArgs {
    /// Keyword-labeled documents (the text shown to the reviewer).
    #[arg(long, alias = "input")]
    pub keywords: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub category: Category,
    /// Append-only JSONL ledger; existing verdicts are skipped.
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub sample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "")]
    pub reviewer: String,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Documents carrying the reference labels.
    #[arg(long, alias = "input")]
    pub truth: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Corpus for the distribution plots; defaults to the reference documents.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Directory receiving report.md and the figures.
    #[arg(long)]
    pub output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Clean(a) => commands::clean(a),
        Command::Split(a) => commands::split(a),
        Command::Synth(a) => commands::synth(a),
        Command::KeywordLabel(a) => commands::keyword_label(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Cooccur(a) => commands::cooccur(a),
        Command::Review(a) => review::run(a),
        Command::Report(a) => report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
