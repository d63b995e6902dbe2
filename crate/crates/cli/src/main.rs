use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stream_bai_cli::{commands, CliError, CliResult, ExperimentConfig};

/// Streaming best-arm identification with selective label queries:
/// seeded sweeps, design dumps, and bound curves as plot-ready CSV.
#[derive(Parser)]
#[command(name = "stream-bai", version, about)]
struct Cli {
    /// Experiment configuration (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep trials (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory (default: config output_dir, then the working
    /// directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the (tau, mode) label-complexity sweep and writes sweep.csv.
    Sweep,
    /// Solves the query design at one budget and writes per-point
    /// probabilities to design.csv.
    DumpDesign {
        /// Stream budget; defaults to the largest tau_grid entry.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Writes the label-floor and achievable-label curves to tradeoff.csv.
    Tradeoff,
    /// Tabulates classification label bounds on a threshold-class demo.
    ClassifyDemo,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Failure(format!("worker pool: {e}")))?;
    }

    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    // The echo records where the outputs actually went.
    config.output_dir = Some(out_dir.clone());

    match cli.command {
        Command::Sweep => commands::cmd_sweep(&config, &out_dir),
        Command::DumpDesign { tau } => {
            let tau =
                tau.unwrap_or_else(|| *config.tau_grid.last().expect("validated non-empty") as f64);
            commands::cmd_dump_design(&config, tau, &out_dir)
        }
        Command::Tradeoff => commands::cmd_tradeoff(&config, &out_dir),
        Command::ClassifyDemo => commands::cmd_classify_demo(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
