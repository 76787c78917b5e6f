//! `actiscreen` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or model error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use actiscreen::{Exec, ScalerKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "actiscreen",
    version,
    about = "Actigraphy depression screening workflow"
)]
pub struct Cli {
    /// Seed for every random choice (folds, bootstraps, pairings).
    #[arg(long, global = true, default_value_t = 42, env = "ACTISCREEN_SEED")]
    pub seed: u64,

    /// Run every loop on the calling thread.
    #[arg(long, global = true, env = "ACTISCREEN_SEQUENTIAL")]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100, env = "ACTISCREEN_TREES")]
    pub trees: usize,
    #[arg(long, env = "ACTISCREEN_MAX_DEPTH")]
    pub max_depth: Option<usize>,
    #[arg(long, default_value_t = 1, env = "ACTISCREEN_MIN_SAMPLES_LEAF")]
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalerArg {
    Minmax,
    Robust,
}

impl From<ScalerArg> for ScalerKind {
    fn from(s: ScalerArg) -> Self {
        match s {
            ScalerArg::Minmax => ScalerKind::MinMax,
            ScalerArg::Robust => ScalerKind::Robust,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stratified 5-fold cross-validation over days, forest against dummy.
    Cv5 {
        /// Depresjon root with `condition/` and `control/`.
        #[arg(long, env = "ACTISCREEN_DATA")]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalerArg::Robust, env = "ACTISCREEN_SCALER")]
        scaler: ScalerArg,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value = "out/cv5", env = "ACTISCREEN_OUT")]
        out: PathBuf,
    },
    /// Leave-one-pair-out over subjects.
    LoocvPairs {
        #[arg(long, env = "ACTISCREEN_DATA")]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalerArg::Robust, env = "ACTISCREEN_SCALER")]
        scaler: ScalerArg,
        /// Defaults to the size of the smaller class.
        #[arg(long)]
        max_pairs: Option<usize>,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value = "out/loocv-pairs", env = "ACTISCREEN_OUT")]
        out: PathBuf,
    },
    /// Train on one device, test per subject on another.
    Transfer {
        /// Depresjon root used for training.
        #[arg(long)]
        secondary: PathBuf,
        /// Root of labelled step logs, same sub-directories, `.json` files.
        #[arg(long)]
        primary: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalerArg::Robust, env = "ACTISCREEN_SCALER")]
        scaler: ScalerArg,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value = "out/transfer", env = "ACTISCREEN_OUT")]
        out: PathBuf,
    },
    /// Fit a forest on a whole dataset and write a model bundle.
    Train {
        #[arg(long, env = "ACTISCREEN_DATA")]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalerArg::Robust, env = "ACTISCREEN_SCALER")]
        scaler: ScalerArg,
        #[command(flatten)]
        forest: ForestArgs,
        /// Stored in the bundle metadata; defaults to now.
        #[arg(long)]
        trained_at: Option<String>,
        #[arg(long, default_value = "model.bundle")]
        out: PathBuf,
    },
    /// Screen a local step log with a bundle.
    Predict {
        #[arg(long, env = "ACTISCREEN_MODEL")]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long, default_value_t = actiscreen::screening::DEFAULT_WINDOW)]
        window: usize,
    },
    /// Q-Q points between two devices' hourly totals, raw and scaled.
    Qq {
        /// Depresjon root.
        #[arg(long)]
        a: PathBuf,
        /// A step-log file, or a directory laid out like `transfer --primary`.
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "out/qq", env = "ACTISCREEN_OUT")]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "ACTISCREEN_MODEL")]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 8080, env = "ACTISCREEN_PORT")]
        port: u16,
        #[arg(long, default_value = "127.0.0.1", env = "ACTISCREEN_BIND")]
        bind: String,
        #[arg(long, default_value_t = actiscreen_serve::DEFAULT_MAX_UPLOAD_BYTES, env = "ACTISCREEN_MAX_UPLOAD_BYTES")]
        max_upload_bytes: usize,
        /// Front-end assets served at `/`.
        #[arg(long, env = "ACTISCREEN_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("ACTISCREEN_LOG")
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
