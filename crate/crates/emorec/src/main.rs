//! `emorec` command line: extract, select, train, eval, predict, synth.
//!
//! Exit status is 0 on success and 2 on any validation or IO problem.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use emorec::config::Overlay;
use emorec::pipeline::{
    run_eval, run_extract, run_predict, run_select, run_synth, run_train, Layout, SplitMode,
};
use emorec_core::lld::FrameConfig;
use emorec_core::models::{
    DEFAULT_C, DEFAULT_EPOCHS, DEFAULT_K, DEFAULT_LEARNING_RATE, DEFAULT_PRUNE_FRACTION,
};
use emorec_core::selection::{DEFAULT_BINS, DEFAULT_DELTA, DEFAULT_TARGET};

#[derive(Parser)]
#[command(
    name = "emorec",
    about = "Speech emotion recognition: acoustic features, feature selection, \
             four classifiers, majority voting",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Berlin,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 352-value feature vectors from a corpus directory
    Extract {
        /// Corpus directory
        #[arg(long)]
        input: PathBuf,
        /// Directory layout: label-coded filenames or class subdirectories
        #[arg(long, value_enum)]
        layout: LayoutArg,
        /// Output feature CSV
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        frame_ms: Option<f64>,
        #[arg(long)]
        hop_ms: Option<f64>,
        #[arg(long)]
        voicing_threshold: Option<f64>,
        /// Optional key = value config file (flags win)
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rank features and choose the working set
    Select {
        #[arg(long)]
        features: PathBuf,
        /// Output selection listing
        #[arg(long)]
        out: PathBuf,
        /// Number of features to keep
        #[arg(long)]
        target: Option<usize>,
        /// Discretization bins for the correlation filter
        #[arg(long)]
        bins: Option<usize>,
        /// Class-relevance threshold for the correlation filter
        #[arg(long)]
        delta: Option<f64>,
        /// Fit the selection on the seeded training partition only
        #[arg(long)]
        train_only: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_frac: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train the four classifiers on the seeded training partition
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        /// Output model directory
        #[arg(long)]
        out: PathBuf,
        /// Run seed: drives the split, tree pruning holdout, and network init
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        train_frac: Option<f64>,
        /// Nearest-neighbor count
        #[arg(long)]
        k: Option<usize>,
        /// Soft-margin penalty
        #[arg(long)]
        c: Option<f64>,
        /// Backprop learning rate
        #[arg(long)]
        lr: Option<f64>,
        /// Backprop epochs
        #[arg(long)]
        epochs: Option<usize>,
        /// Share of training rows held out for tree pruning
        #[arg(long)]
        prune_frac: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate a model directory; prints each classifier's table and the vote
    Eval {
        #[arg(long)]
        models: PathBuf,
        /// Feature CSV (repeat for a multi-corpus report)
        #[arg(long, required = true)]
        features: Vec<PathBuf>,
        /// Also write the report as CSV
        #[arg(long)]
        report: Option<PathBuf>,
        /// Rows to evaluate: the seeded test partition, or everything
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Classify a single WAV file
    Predict {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        wav: PathBuf,
    },
    /// Generate the synthetic four-class demo corpus
    Synth {
        /// Output corpus directory (class-per-subdirectory layout)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        clips_per_class: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn overlay(config: &Option<PathBuf>) -> anyhow::Result<Overlay> {
    Ok(match config {
        Some(path) => Overlay::from_file(path)?,
        None => Overlay::empty(),
    })
}

fn validated_train_frac(value: f64) -> anyhow::Result<f64> {
    if !(0.5..=0.95).contains(&value) {
        anyhow::bail!("train fraction {value} outside [0.5, 0.95]");
    }
    Ok(value)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Extract {
            input,
            layout,
            out,
            frame_ms,
            hop_ms,
            voicing_threshold,
            config,
        } => {
            let overlay = overlay(&config)?;
            let defaults = FrameConfig::default();
            let cfg = FrameConfig {
                frame_ms: overlay.get("frame_ms", frame_ms, defaults.frame_ms)?,
                hop_ms: overlay.get("hop_ms", hop_ms, defaults.hop_ms)?,
                mel_filters: overlay.get("mel_filters", None, defaults.mel_filters)?,
                fft_size: None,
                preemphasis: overlay.get("preemphasis", None, defaults.preemphasis)?,
                f0_min_hz: overlay.get("f0_min_hz", None, defaults.f0_min_hz)?,
                f0_max_hz: overlay.get("f0_max_hz", None, defaults.f0_max_hz)?,
                voicing_threshold: overlay.get(
                    "voicing_threshold",
                    voicing_threshold,
                    defaults.voicing_threshold,
                )?,
            };
            let layout = match layout {
                LayoutArg::Berlin => Layout::Berlin,
                LayoutArg::Generic => Layout::Generic,
            };
            run_extract(&input, layout, &out, &cfg)
        }
        Command::Select {
            features,
            out,
            target,
            bins,
            delta,
            train_only,
            seed,
            train_frac,
            config,
        } => {
            let overlay = overlay(&config)?;
            let train_frac = validated_train_frac(overlay.get("train_frac", train_frac, 0.75)?)?;
            run_select(
                &features,
                &out,
                overlay.get("target", target, DEFAULT_TARGET)?,
                overlay.get("bins", bins, DEFAULT_BINS)?,
                overlay.get("delta", delta, DEFAULT_DELTA)?,
                train_only,
                overlay.get("seed", seed, 0)?,
                train_frac,
            )
        }
        Command::Train {
            features,
            selection,
            out,
            seed,
            train_frac,
            k,
            c,
            lr,
            epochs,
            prune_frac,
            config,
        } => {
            let overlay = overlay(&config)?;
            let train_frac = validated_train_frac(overlay.get("train_frac", train_frac, 0.75)?)?;
            run_train(
                &features,
                &selection,
                &out,
                seed,
                train_frac,
                overlay.get("k", k, DEFAULT_K)?,
                overlay.get("c", c, DEFAULT_C)?,
                overlay.get("lr", lr, DEFAULT_LEARNING_RATE)?,
                overlay.get("epochs", epochs, DEFAULT_EPOCHS)?,
                overlay.get("prune_fraction", prune_frac, DEFAULT_PRUNE_FRACTION)?,
            )
        }
        Command::Eval {
            models,
            features,
            report,
            split,
        } => {
            let mode = match split {
                SplitArg::Test => SplitMode::Test,
                SplitArg::All => SplitMode::All,
            };
            run_eval(&models, &features, report.as_deref(), mode).map(|_| ())
        }
        Command::Predict { models, wav } => run_predict(&models, &wav).map(|_| ()),
        Command::Synth {
            out,
            clips_per_class,
            seed,
        } => run_synth(&out, clips_per_class, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
