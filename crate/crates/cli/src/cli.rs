use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linesift::classifier::DEFAULT_CROSS_FIT_FOLDS;
use linesift::downstream::{SeedScheme, DEFAULT_K_SWEEP, DEFAULT_MAX_ITERS};

#[derive(Debug, Parser)]
#[command(
    name = "linesift",
    version,
    about = "Line-level detection and removal of tables, code, formulas and other non-prose lines",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Seed for every random choice (splits, SGD order, baselines, simulated users, generators).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Outputs do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Print the JSON schema of a file format and exit.
    #[arg(long, value_enum)]
    pub schema: Option<SchemaKind>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaKind {
    Corpus,
    Gold,
    Model,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Word-vector utilities.
    #[command(subcommand)]
    Embed(EmbedCommand),
    /// Train a classifier on a labeled corpus.
    Train(TrainCmd),
    /// Label every line of a corpus.
    Predict(PredictCmd),
    /// Score a model, or cross-validate a configuration, on a labeled corpus.
    Eval(EvalCmd),
    /// Compare seeded k-means clustering before and after removing unnatural lines.
    Cluster(ClusterCmd),
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Lecture-slide-like documents with every line labeled.
    Slides(SynthSlidesCmd),
    /// Topic-clustered documents sharing code blocks across topics, plus a gold clustering.
    Topics(SynthTopicsCmd),
}

#[derive(Debug, Args)]
pub struct SynthSlidesCmd {
    #[arg(long, default_value_t = 200)]
    pub docs: usize,
    /// Unnatural label shares, e.g. `TABLE=0.014,CODE=0.146`; TEXT takes the rest.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<String>>,
    #[arg(long, default_value_t = 30)]
    pub min_lines: usize,
    #[arg(long, default_value_t = 70)]
    pub max_lines: usize,
    #[arg(long, default_value_t = 1)]
    pub min_block_len: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthTopicsCmd {
    #[arg(long, default_value_t = 4)]
    pub topics: usize,
    #[arg(long, default_value_t = 10)]
    pub docs_per_topic: usize,
    #[arg(long, default_value_t = 3)]
    pub shared_blocks: usize,
    #[arg(long, default_value_t = 10)]
    pub shared_block_lines: usize,
    #[arg(long, default_value_t = 1)]
    pub blocks_per_doc: usize,
    #[arg(long, default_value_t = 0.1)]
    pub off_topic_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub gold_out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EmbedCommand {
    /// Train skip-gram vectors on the lower-cased tokens of a corpus.
    Train(EmbedTrainCmd),
}

#[derive(Debug, Args)]
pub struct EmbedTrainCmd {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub learning_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Feature and optimizer settings shared by `train` and `eval --cv`.
#[derive(Debug, Args)]
pub struct TrainOpts {
    /// Feature families: any of ngram, syntax, layout, embedding, sequential,
    /// or `none`. Default: all but embedding, plus embedding when
    /// `--embedding` is given.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Word vectors for the embedding features.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Equal-frequency bins for the table layout score.
    #[arg(long, default_value_t = 10)]
    pub layout_bins: usize,
    /// Weight layout features by the raw S/N edit distance instead of the similarity.
    #[arg(long)]
    pub raw_edit_distance: bool,
    /// Regularization trade-off; larger fits the training data harder.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// SGD passes over the training lines.
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Step-size offset (default: derived from the regularization strength).
    #[arg(long)]
    pub t0: Option<f64>,
    /// Correction rounds after the second stage.
    #[arg(long, default_value_t = 0)]
    pub extra_dagger_rounds: usize,
    /// Parts used to produce held-out stage-1 predictions for stage 2; 0 predicts in-sample.
    #[arg(long, default_value_t = DEFAULT_CROSS_FIT_FOLDS)]
    pub cross_fit_folds: usize,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    /// Labeled corpus (JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for report.json, report.csv and resolved-config.json (default: next to the model).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Run k-fold cross-validation before the final fit.
    #[arg(long)]
    pub cv: Option<usize>,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct PredictCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Labeled corpus to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the documents with unnatural lines removed.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Labels kept by `--clean`.
    #[arg(long, value_delimiter = ',', default_value = "TEXT")]
    pub keep: Vec<String>,
    #[arg(long, value_enum, default_value = "2")]
    pub stage: StageArg,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["model", "cv"]))]
pub struct EvalCmd {
    /// Labeled corpus.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Score this model on the corpus.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Cross-validate the training options below instead.
    #[arg(long)]
    pub cv: Option<usize>,
    #[arg(long, value_enum, default_value = "2")]
    pub stage: StageArg,
    /// Exit with status 4 when the unnatural-class macro-F1 (a fraction) is below this.
    #[arg(long)]
    pub min_macro_f1: Option<f64>,
    /// Directory for report.json, report.csv and resolved-config.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Debug, Args)]
pub struct ClusterCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Document vector sizes (top-k TF-IDF terms).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_K_SWEEP.to_vec())]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = SeedScheme::ALL.to_vec())]
    pub schemes: Vec<SeedScheme>,
    /// Labels kept in the cleaned documents.
    #[arg(long, value_delimiter = ',', default_value = "TEXT")]
    pub keep: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Also fit relevance-vs-similarity logistic regressions and compare AIC.
    #[arg(long)]
    pub sim_aic: bool,
}
