use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod render;
mod report;
mod schema;

/// Constrained saddle search for singular, flexible bar frameworks.
#[derive(Parser, Debug)]
#[command(name = "framesaddle", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Run configuration (TOML, or JSON such as a config.snapshot.json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Search seed; overrides the configuration file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Use a built-in framework instead of an input file.
    #[arg(long, global = true, value_parser = ["four-bar", "heptagon-1", "heptagon-2"])]
    pub fixture: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Framework JSON, or a result.json written by `search`.
    pub input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rigidity rank, flex and stress dimensions, LICQ margin and Maxwell count.
    Analyze(Input),
    /// Index-k saddle search on the free-edge energy, then certification.
    Search(SearchArgs),
    /// Certificate for the configuration as given.
    Certify(Input),
    /// Second-order stress test of the infinitesimal flexes.
    StressTest(StressArgs),
    /// Trace a nonlinear flex out of a singular configuration.
    Follow(FollowArgs),
    /// Draw a planar framework as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub input: Input,
    /// Saddle index.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Number of (randomly perturbed) starting points.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Random-walk length used to perturb starts after the first.
    #[arg(long)]
    pub perturbation: Option<f64>,
    /// Run the starts on a thread pool.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Args, Debug)]
pub struct StressArgs {
    #[command(flatten)]
    pub input: Input,
    /// Also evaluate the stress forms at these flex-basis coefficients.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct FollowArgs {
    #[command(flatten)]
    pub input: Input,
    /// Index of the realizable direction to follow.
    #[arg(long, default_value_t = 0)]
    pub direction: usize,
    /// Follow `sign · direction`.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub sign: i32,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub arc_step: Option<f64>,
    /// Follow the flex with these flex-basis coefficients instead of a
    /// realizable direction (it need not pass the stress test).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Also draw the first and last frames with their velocities.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: Input,
    /// Draw a frame of a path.jsonl instead of the input configuration.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Frame of `--path` to draw (default: the last).
    #[arg(long)]
    pub frame: Option<usize>,
    /// Overlay arrows for this realizable flex direction.
    #[arg(long)]
    pub flex: Option<usize>,
    /// Output file (default: framework.svg in the output directory).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::error_code(&err))
        }
    }
}
