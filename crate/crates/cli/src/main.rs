use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use twinmon_cli::config::{RunConfig, Task};
use twinmon_cli::figures::FigureId;
use twinmon_cli::{load_config, reproduce_figure, run_task, CliError};

/// Simulator and analysis toolkit for a two-transmon artificial
/// molecule with symmetry-selective waveguide coupling.
#[derive(Debug, Parser)]
#[command(name = "twinmon", version, about)]
struct Cli {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Task to run (overrides the config file).
    #[arg(long)]
    task: Option<String>,

    /// Reproduce a standard figure recipe instead of running a task.
    #[arg(long, conflicts_with = "task")]
    figure: Option<String>,

    /// Output directory (default: $TWINMON_OUT or ./twinmon-out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Random seed recorded in the run manifest.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Integrator relative tolerance override.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => {
            let task = cli
                .task
                .as_deref()
                .or(cli.figure.as_deref().map(|_| "eigen"))
                .ok_or_else(|| {
                    CliError::Config("no --config given: --task or --figure is required".into())
                })?;
            if cli.figure.is_some() {
                RunConfig::for_task(Task::Eigen)
            } else {
                RunConfig::for_task(task.parse()?)
            }
        }
    };
    if let Some(task) = &cli.task {
        config.task = task.parse()?;
        config.fill_task_defaults();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.workers = Some(workers);
    }
    if let Some(tol) = cli.tolerance {
        config.tolerance = Some(tol);
    }

    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("TWINMON_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("twinmon-out"));

    let workers = config.workers;
    let execute = || -> Result<(), CliError> {
        let manifest = match &cli.figure {
            Some(fig) => {
                let id: FigureId = fig.parse()?;
                reproduce_figure(id, &config, &out_dir)?
            }
            None => run_task(&config, &out_dir)?,
        };
        eprintln!(
            "wrote {} file(s) + manifest.json to {}",
            manifest.files.len(),
            out_dir.display()
        );
        Ok(())
    };
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            pool.install(execute)
        }
        None => execute(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
