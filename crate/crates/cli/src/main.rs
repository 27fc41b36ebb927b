//! `hoicap` command-line front end.

mod commands;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::LazyLock;

use clap::{Args, Parser, Subcommand};

use hoicap::metrics::Protocol;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "hoicap", version = VERSION_LINE.as_str(), about = "Hand-object interaction capture toolkit")]
struct Cli {
    /// Worker threads for frame-parallel work (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic assets, markers and ground truth.
    Synth {
        /// Synthesis config (JSON). Defaults to synth.json in $HOICAP_CONFIG_DIR, then built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config frame count.
        #[arg(long)]
        frames: Option<usize>,
        /// Write ground-truth fields as raw f32 files.
        #[arg(long)]
        binary: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Solve hand and object poses from a marker sequence.
    Solve {
        #[arg(long)]
        assets: PathBuf,
        #[arg(long)]
        markers: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Levenberg-Marquardt iteration cap per frame.
        #[arg(long, default_value_t = 50)]
        max_iterations: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Compute the four interaction fields for every frame of a pose file.
    Fields {
        #[arg(long)]
        assets: PathBuf,
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Distance clamp, meters.
        #[arg(long, default_value_t = hoicap::fields::DEFAULT_D_MAX)]
        dmax: f64,
        #[arg(long)]
        binary: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Evaluate predictions against ground truth under a protocol.
    Eval {
        /// Ground-truth evaluation manifest.
        #[arg(long)]
        gt: PathBuf,
        /// Prediction evaluation manifest.
        #[arg(long)]
        pred: PathBuf,
        /// Asset bundle for entries that do not name their own.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long, default_value = "P1", value_parser = parse_protocol)]
        protocol: Protocol,
        /// Output directory for report.json, report.txt and pcd.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Aggregate per-vertex contact frequencies over pose files.
    Heatmap {
        #[arg(long)]
        assets: PathBuf,
        /// One or more pose files.
        #[arg(long, required = true, num_args = 1..)]
        poses: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Contact distance, meters.
        #[arg(long, default_value_t = hoicap::fields::DEFAULT_CONTACT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = hoicap::fields::DEFAULT_D_MAX)]
        dmax: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Estimate a hinge axis from relative part poses.
    Axis {
        /// JSON array of {"rot": [3], "trans": [3]} poses of the moving part relative to the base.
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Check that files parse and satisfy their format's invariants.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: hoicap::Error| e.to_string())
}

static VERSION_LINE: LazyLock<String> =
    LazyLock::new(|| format!("{} (formats: {})", hoicap::VERSION, hoicap::FORMATS.join(", ")));

/// Classification of a failed command into an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<hoicap::Error> for Failure {
    fn from(e: hoicap::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.into())
        } else {
            Failure::Data(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<hoicap::Error>() {
            Ok(e) => e.into(),
            Err(e) => Failure::Data(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
