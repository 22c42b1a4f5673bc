//! `omnigaze` command-line tool.
//!
//! Structured results go to stdout as JSON (or a table for `evaluate`);
//! errors go to stderr as a single JSON line. Exit codes: 0 success,
//! 1 usage, 2 missing input, 3 data mismatch, 4 verification failure.

mod commands;
mod draw;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omnigaze::metrics::BinScheme;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "omnigaze", version, about = "Fisheye gaze toolkit: synthesis, annotation, kernels and evaluation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Camera JSON (default: 180 degree equidistant, 1024 x 1024)
    #[arg(long, global = true, value_name = "JSON")]
    pub camera: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub iou: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub conf: f64,
    /// Bin breakdowns for `evaluate`: face_width, yaw, distance (comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    pub bins: Vec<BinScheme>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a fisheye image from a five-face cubemap manifest
    Render(commands::render::RenderArgs),
    /// Re-target an image or an annotation manifest to another camera
    Remap(commands::remap::RemapArgs),
    /// Write a seeded manifest of synthetic annotations
    Generate(commands::generate::GenerateArgs),
    /// Check every manifest record against the sampling ranges and schema
    Validate(commands::validate::ValidateArgs),
    /// Score a prediction manifest against ground truth
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Draw boxes and gaze arrows onto images
    Visualize(commands::visualize::VisualizeArgs),
    /// Network kernel utilities
    #[command(subcommand)]
    Kernels(commands::kernels::KernelsCommand),
    /// Summary statistics of a manifest
    Stats(commands::stats::StatsArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Render(a) => commands::render::run(g, a),
        Command::Remap(a) => commands::remap::run(g, a),
        Command::Generate(a) => commands::generate::run(g, a),
        Command::Validate(a) => commands::validate::run(g, a),
        Command::Evaluate(a) => commands::evaluate::run(g, a),
        Command::Visualize(a) => commands::visualize::run(g, a),
        Command::Kernels(c) => commands::kernels::run(g, c),
        Command::Stats(a) => commands::stats::run(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first).to_json_line());
            return ExitCode::from(error::Exit::Usage as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit as u8)
        }
    }
}
