//! `kinetic`: command-line front end of the harness.
//!
//! Exit codes: 0 success, 1 criterion failure or runtime error, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinetic_maxwell::harness::{
    run_decay, run_paths, run_simulate, run_spectrum, run_trace, run_verify_command, HarnessError, RunConfig, RunContext,
};

#[derive(Parser)]
#[command(name = "kinetic", version, about = "Boltzmann equation with Maxwell wall reflection: runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; missing tables take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Standard small-bump run: norm series, summary, snapshots.
    Simulate,
    /// Acceptance criteria, one PASS/FAIL line each.
    Verify {
        /// Comma-separated criterion ids or slug fragments, e.g. `constants` or `5,geometry`.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Specular backward trajectory of one phase point.
    Trace,
    /// Path-memory survival table.
    Paths,
    /// Eigenvalues of the discrete linearized operator.
    Spectrum,
    /// Decay of the perturbation norm and fitted rate.
    Decay,
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.validate()?;
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(HarnessError::Config("--workers must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    let ctx = RunContext::new(config, cli.seed, cli.out, workers);
    let artifacts = match cli.command {
        Command::Verify { filter } => {
            let (report, artifacts) = run_verify_command(&ctx, filter.as_deref())?;
            eprintln!("{} files in {}", artifacts.files.len(), ctx.out.display());
            return Ok(report.passed);
        }
        Command::Simulate => run_simulate(&ctx)?,
        Command::Trace => run_trace(&ctx)?,
        Command::Paths => run_paths(&ctx)?,
        Command::Spectrum => run_spectrum(&ctx)?,
        Command::Decay => run_decay(&ctx)?,
    };
    println!("{}", serde_json::to_string_pretty(&artifacts.summary).unwrap_or_default());
    eprintln!("{} files in {}", artifacts.files.len(), ctx.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
