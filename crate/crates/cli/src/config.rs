use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subsim::classifier::{Mode, Objective};
use subsim::corpus::{Measure, ScoreOptions, SplitSpec};
use subsim::groupsim::{Aggregation, SimOptions, Variant};
use subsim::DEFAULT_TOLERANCE;

#[derive(Debug, Parser)]
#[command(
    name = "subsim",
    version,
    about = "Subspace-projection similarity of sentences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Similarity of two sentences.
    Sim(SimArgs),
    /// Score every pair of a corpus and write a TSV.
    Score(ScoreArgs),
    /// Split the corpus, train thresholds on the training part, save the model.
    Train(TrainArgs),
    /// Apply a saved model to the test part and report the metrics.
    Eval(EvalArgs),
    /// Check that the basis and Gram routes agree on random instances.
    Selftest(SelftestArgs),
    /// Write the synthetic orthogonal-vocabulary corpus and its embeddings.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Basis,
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    ProjectionSim,
    PairwiseMean,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::ProjectionSim => Measure::ProjectionSim,
            MeasureArg::PairwiseMean => Measure::PairwiseMean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ThreeClass,
    TwoClassMergeLow,
    TwoClassMergeHigh,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ThreeClass => Mode::ThreeClass,
            ModeArg::TwoClassMergeLow => Mode::TwoClassMergeLow,
            ModeArg::TwoClassMergeHigh => Mode::TwoClassMergeHigh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    MacroPrecision,
    Accuracy,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MacroPrecision => Objective::MacroPrecision,
            ObjectiveArg::Accuracy => Objective::Accuracy,
        }
    }
}

/// Embedding and similarity settings shared by every scoring command.
#[derive(Debug, Args)]
pub struct SimilarityArgs {
    /// Embedding table in word2vec text format (.gz accepted).
    #[arg(long, short = 'e')]
    pub embeddings: PathBuf,
    /// Read at most this many embedding entries.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Relative tolerance for rank decisions.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Route used for the vector-vs-group cosine.
    #[arg(long, value_enum, default_value_t = VariantArg::Basis)]
    pub variant: VariantArg,
    /// Halve the raw per-direction sums instead of averaging the means.
    #[arg(long)]
    pub raw_sum: bool,
    /// Keep repeated tokens as separate rows.
    #[arg(long)]
    pub no_dedup: bool,
}

impl SimilarityArgs {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            tolerance: self.tol,
            variant: match self.variant {
                VariantArg::Basis => Variant::Basis,
                VariantArg::Gram => Variant::Gram,
            },
            aggregation: if self.raw_sum {
                Aggregation::RawSum
            } else {
                Aggregation::Mean
            },
        }
    }

    pub fn score_options(&self, measure: Measure) -> ScoreOptions {
        ScoreOptions {
            measure,
            sim: self.sim_options(),
            dedup: !self.no_dedup,
        }
    }
}

/// Corpus and split settings shared by `train` and `eval`.
#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Labelled pairs (TSV: id, text1, text2, class).
    #[arg(long, short = 'c')]
    pub corpus: PathBuf,
    /// Fixed test corpus; when given, all of --corpus is used for training.
    #[arg(long)]
    pub test_corpus: Option<PathBuf>,
    /// Share of --corpus used for training.
    #[arg(long, default_value_t = 0.7)]
    pub fraction: f64,
    /// Seed of the split shuffle.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MeasureArg::ProjectionSim)]
    pub measure: MeasureArg,
}

impl ProtocolArgs {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.fraction,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimArgs {
    pub text1: String,
    pub text2: String,
    #[command(flatten)]
    pub similarity: SimilarityArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, short = 'c')]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = MeasureArg::ProjectionSim)]
    pub measure: MeasureArg,
    /// Output TSV; standard output when omitted.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub similarity: SimilarityArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::ThreeClass)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MacroPrecision)]
    pub objective: ObjectiveArg,
    /// Where to write the model file.
    #[arg(long, short = 'm')]
    pub model_out: PathBuf,
    #[command(flatten)]
    pub similarity: SimilarityArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Model file written by `train`.
    #[arg(long, short = 'm')]
    pub model: PathBuf,
    /// Also report the other measure, with thresholds retrained on the
    /// training part using the model's mode and objective.
    #[arg(long)]
    pub compare: bool,
    /// Write the report as TSV as well.
    #[arg(long)]
    pub report_tsv: Option<PathBuf>,
    #[command(flatten)]
    pub similarity: SimilarityArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Relative tolerance for rank decisions.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Largest accepted disagreement between the routes.
    #[arg(long, default_value_t = 1e-8)]
    pub agreement: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1913)]
    pub count: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub pairs_out: PathBuf,
    #[arg(long)]
    pub embeddings_out: PathBuf,
}
