//! `hdc-eeg`: generate, preprocess, train, evaluate and sweep from the shell.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data validation
//! or model format error, 4 I/O error. Every flag can also be set through an
//! `HDC_EEG_<FLAG>` environment variable.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdc_eeg::dataio::SplitCounts;
use hdc_eeg::{HdcError, PipelineParams, Seed, SplitConfig, StatsScope};

#[derive(Parser, Debug)]
#[command(name = "hdc-eeg", version, about = "Hyperdimensional EEG classifier")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, env = "HDC_EEG_THREADS")]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic two-class dataset.
    GenSynth(GenSynthArgs),
    /// Write the fitted channel statistics and quantised level traces.
    Preprocess(PreprocessArgs),
    /// Train on the training split and save the model.
    Train(TrainArgs),
    /// Evaluate a saved model and write a JSON report.
    Eval(EvalArgs),
    /// Repeat the train/test experiment over several seeded splits.
    Holdout(HoldoutArgs),
    /// Accuracy as a function of training-set size, as CSV.
    Sweep(SweepArgs),
    /// Print a JSON summary of a saved model.
    InspectModel(InspectArgs),
}

#[derive(Args, Debug)]
struct GenSynthArgs {
    /// Output dataset directory.
    #[arg(long, env = "HDC_EEG_OUT")]
    out: PathBuf,
    /// Patients per class.
    #[arg(long, default_value_t = 20, env = "HDC_EEG_PATIENTS")]
    patients: usize,
    #[arg(long, default_value_t = 0, env = "HDC_EEG_SEED")]
    seed: u64,
    /// Samples per channel.
    #[arg(long, default_value_t = 7680, env = "HDC_EEG_SAMPLES")]
    samples: usize,
    #[arg(long, default_value_t = 256.0, env = "HDC_EEG_SAMPLE_RATE")]
    sample_rate: f64,
    #[arg(long, value_delimiter = ',', default_value = "F4,Cz", env = "HDC_EEG_CHANNELS")]
    channels: Vec<String>,
    #[arg(long, default_value_t = 6.0, env = "HDC_EEG_ADHD_FREQ")]
    adhd_freq: f64,
    #[arg(long, default_value_t = 12.0, env = "HDC_EEG_CONTROL_FREQ")]
    control_freq: f64,
    /// Sinusoid amplitude in microvolts.
    #[arg(long, default_value_t = 50.0, env = "HDC_EEG_AMPLITUDE")]
    amplitude: f64,
    /// Gaussian noise standard deviation in microvolts.
    #[arg(long, default_value_t = 10.0, env = "HDC_EEG_NOISE")]
    noise: f64,
    /// Highest accepted class frequency in Hz.
    #[arg(long, default_value_t = 16.0, env = "HDC_EEG_MAX_FREQ")]
    max_freq: f64,
}

#[derive(Args, Debug, Clone, Copy)]
struct PipelineArgs {
    #[arg(long, default_value_t = 10_000, env = "HDC_EEG_DIMENSION")]
    dimension: usize,
    #[arg(long, default_value_t = 250, env = "HDC_EEG_LEVELS")]
    levels: usize,
    #[arg(long, default_value_t = 32, env = "HDC_EEG_NGRAM")]
    ngram: usize,
    #[arg(long, default_value_t = 512, env = "HDC_EEG_DROP")]
    drop: usize,
    #[arg(long, default_value_t = 8, env = "HDC_EEG_DOWNSAMPLE")]
    downsample: usize,
    #[arg(long, default_value_t = 0.5, env = "HDC_EEG_GATE")]
    gate: f64,
    #[arg(long, default_value_t = 0.5, env = "HDC_EEG_CLIP_LOW_PCT")]
    clip_low_pct: f64,
    #[arg(long, default_value_t = 99.5, env = "HDC_EEG_CLIP_HIGH_PCT")]
    clip_high_pct: f64,
    #[arg(long, default_value_t = 0, env = "HDC_EEG_SEED")]
    seed: u64,
}

impl PipelineArgs {
    fn params(&self) -> PipelineParams {
        PipelineParams {
            dimension: self.dimension,
            levels: self.levels,
            ngram: self.ngram,
            downsample: self.downsample,
            drop: self.drop,
            gate: self.gate,
            seed: Seed(self.seed),
            clip_low_pct: self.clip_low_pct,
            clip_high_pct: self.clip_high_pct,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ScopeArg {
    Train,
    All,
}

impl From<ScopeArg> for StatsScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Train => StatsScope::Train,
            ScopeArg::All => StatsScope::All,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct SplitArgs {
    #[arg(long, default_value_t = 27, env = "HDC_EEG_TRAIN_ADHD")]
    train_adhd: usize,
    #[arg(long, default_value_t = 32, env = "HDC_EEG_TRAIN_CONTROL")]
    train_control: usize,
    #[arg(long, default_value_t = 10, env = "HDC_EEG_TEST_ADHD")]
    test_adhd: usize,
    #[arg(long, default_value_t = 10, env = "HDC_EEG_TEST_CONTROL")]
    test_control: usize,
    /// Draw train and test sets without regard to class, using only the
    /// per-side totals.
    #[arg(long, env = "HDC_EEG_UNIFORM")]
    uniform: bool,
    /// Patients the clipping and quantisation statistics are computed on.
    #[arg(long, value_enum, default_value = "train", env = "HDC_EEG_STATS_SCOPE")]
    stats_scope: ScopeArg,
}

impl SplitArgs {
    fn config(&self) -> SplitConfig {
        SplitConfig {
            counts: SplitCounts {
                train_adhd: self.train_adhd,
                train_control: self.train_control,
                test_adhd: self.test_adhd,
                test_control: self.test_control,
            },
            stratified: !self.uniform,
            stats_scope: self.stats_scope.into(),
        }
    }
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    #[arg(long, env = "HDC_EEG_MANIFEST")]
    manifest: PathBuf,
    /// Output directory for `stats.json` and `levels/<id>.csv`.
    #[arg(long, env = "HDC_EEG_OUT")]
    out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, env = "HDC_EEG_MANIFEST")]
    manifest: PathBuf,
    #[arg(long, env = "HDC_EEG_MODEL_OUT")]
    model_out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Subset {
    /// The held-out patients of the split the model was trained under.
    Test,
    /// Every patient in the manifest.
    All,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, env = "HDC_EEG_MANIFEST")]
    manifest: PathBuf,
    #[arg(long, env = "HDC_EEG_MODEL")]
    model: PathBuf,
    #[arg(long, env = "HDC_EEG_REPORT_OUT")]
    report_out: PathBuf,
    #[arg(long, value_enum, default_value = "test", env = "HDC_EEG_SUBSET")]
    subset: Subset,
}

#[derive(Args, Debug)]
struct HoldoutArgs {
    #[arg(long, env = "HDC_EEG_MANIFEST")]
    manifest: PathBuf,
    /// JSON summary output.
    #[arg(long, env = "HDC_EEG_OUT")]
    out: PathBuf,
    #[arg(long, default_value_t = 10, env = "HDC_EEG_RUNS")]
    runs: usize,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, env = "HDC_EEG_MANIFEST")]
    manifest: PathBuf,
    /// CSV output with columns `k,mean_acc,std`.
    #[arg(long, env = "HDC_EEG_OUT")]
    out: PathBuf,
    /// Optional JSON with per-run accuracies, test sets and training orders.
    #[arg(long, env = "HDC_EEG_DETAILS")]
    details: Option<PathBuf>,
    #[arg(long, default_value_t = 20, env = "HDC_EEG_TEST_SIZE")]
    test_size: usize,
    #[arg(long, default_value_t = 59, env = "HDC_EEG_MAX_TRAIN")]
    max_train: usize,
    #[arg(long, default_value_t = 10, env = "HDC_EEG_RUNS")]
    runs: usize,
    #[arg(long, env = "HDC_EEG_UNIFORM")]
    uniform: bool,
    #[arg(long, value_enum, default_value = "train", env = "HDC_EEG_STATS_SCOPE")]
    stats_scope: ScopeArg,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long, env = "HDC_EEG_MODEL")]
    model: PathBuf,
}

fn exit_code(err: &HdcError) -> u8 {
    match err {
        HdcError::InvalidArgument(_) | HdcError::DimensionMismatch { .. } => 2,
        HdcError::Validation(_)
        | HdcError::Format(_)
        | HdcError::UntrainedMemory(_)
        | HdcError::UndefinedSimilarity => 3,
        HdcError::Io { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::GenSynth(a) => commands::gen_synth(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Holdout(a) => commands::holdout(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::InspectModel(a) => commands::inspect_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
