//! `infoplan` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "infoplan", version, about = "Informative path planning simulator")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random environment and write it as a map file.
    GenerateEnv(GenerateArgs),
    /// Run one episode and write its result.
    Run(RunArgs),
    /// Run the paired planner benchmark.
    Benchmark(BenchmarkArgs),
    /// Render a map file or an episode result as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub obstacles: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value = "map.json")]
    pub out: PathBuf,
    /// Also write an SVG preview.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Map file from `generate-env`; otherwise a map is generated from the world settings.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Map generation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub obstacles: Option<usize>,
    /// greedy, mcts or expert.
    #[arg(long)]
    pub planner: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Seed for sensor noise, start heading and planner; overrides `episode.seed`.
    #[arg(long)]
    pub episode_seed: Option<u64>,
    #[arg(long, default_value = "result.json")]
    pub out: PathBuf,
    /// Write an SVG frame every K timesteps.
    #[arg(long)]
    pub render_every: Option<usize>,
    #[arg(long, default_value = "frames")]
    pub frames_dir: PathBuf,
    /// Write per-solve MPC iteration traces as JSON lines.
    #[arg(long)]
    pub mpc_trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// Comma-separated planner list.
    #[arg(long, value_delimiter = ',')]
    pub planners: Option<Vec<String>>,
    /// Comma-separated obstacle counts.
    #[arg(long, value_delimiter = ',')]
    pub obstacles: Option<Vec<usize>>,
    #[arg(long)]
    pub maps: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub t_max: Option<usize>,
    #[arg(long, default_value = "benchmark.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "benchmark.csv")]
    pub csv: PathBuf,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// A map file or a result file written by `run`.
    pub input: PathBuf,
    #[arg(long, default_value = "render.svg")]
    pub out: PathBuf,
    /// Write the final belief as a PGM image (result files only).
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// Write the final belief probabilities as JSON (result files only).
    #[arg(long)]
    pub belief_json: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INFOPLAN_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
