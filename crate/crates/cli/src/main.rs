//! `artikit`: command-line driver for articulated-object reconstruction tooling.
//!
//! Reports go to standard output as JSON; diagnostics go to standard error.
//! Exit codes: 0 success, 1 self-test failure, 2 input or validation error,
//! 3 numeric or geometric degeneracy.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use artikit::assignment::DEFAULT_CONFIDENCE_THRESHOLD;
use artikit::metrics::{DEFAULT_POINTS, DEFAULT_STATES, DEFAULT_TAU};

#[derive(Parser, Debug)]
#[command(
    name = "artikit",
    version,
    about = "Articulated 3D object kinematics and evaluation"
)]
pub struct Cli {
    /// Print progress diagnostics to standard error (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Worker threads for parallel stages; 0 picks automatically.
    #[arg(long, env = "ARTIKIT_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write one point cloud per sampled articulation state plus a manifest.
    Articulate(ArticulateArgs),
    /// Compare a predicted model against ground truth.
    Evaluate(EvaluateArgs),
    /// Build a kinematic tree from part-category probabilities.
    Tree(TreeArgs),
    /// Hungarian-match predicted masks to ground-truth masks.
    Match(MatchArgs),
    /// Interpolate voxel features at points and lift them through a triplane.
    Features(FeaturesArgs),
    /// Loss kernel utilities.
    Losses {
        #[command(subcommand)]
        action: LossesCommand,
    },
    /// Export a model as a URDF document.
    ExportUrdf(ExportUrdfArgs),
}

#[derive(Subcommand, Debug)]
pub enum LossesCommand {
    /// Evaluate every documented kernel example and report pass/fail.
    Selftest {
        /// Emit the table as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
pub struct ArticulateArgs {
    /// Articulation JSON file.
    pub model: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STATES)]
    pub states: usize,
    /// Mesh manifest; when given, each state is resampled from the meshes.
    #[arg(long)]
    pub meshes: Option<PathBuf>,
    /// Surface samples per state when meshes are given.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Predicted articulation JSON file.
    pub pred: PathBuf,
    /// Ground-truth articulation JSON file.
    pub gt: PathBuf,
    #[arg(long)]
    pub pred_meshes: Option<PathBuf>,
    #[arg(long)]
    pub gt_meshes: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STATES)]
    pub states: usize,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TreeArgs {
    /// JSON part-category probabilities: a matrix, or `{"part_probs": .., "root_scores": ..}`.
    pub logits: PathBuf,
    /// JSON category compatibility matrix.
    pub compat: PathBuf,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    /// Predicted mask file (bitset or f32 logits, with sidecar).
    pub pred: PathBuf,
    /// Ground-truth mask file (bitset, with sidecar).
    pub gt: PathBuf,
    /// JSON array of per-query confidences; queries below the threshold are dropped first.
    #[arg(long)]
    pub confidences: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Sparse voxel grid file.
    pub grid: PathBuf,
    /// JSON array of `[x, y, z]` points in the canonical cube.
    pub points: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub triplane_resolution: usize,
    /// Output directory for `f_geo.bin` and `triplane.bin` with sidecars.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportUrdfArgs {
    /// Articulation JSON file.
    pub model: PathBuf,
    /// Mesh manifest whose paths are referenced verbatim by the URDF.
    #[arg(long)]
    pub meshes: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("artikit: warning: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("artikit: error: {}", f.message);
            for line in &f.details {
                eprintln!("  {line}");
            }
            ExitCode::from(f.code)
        }
    }
}
