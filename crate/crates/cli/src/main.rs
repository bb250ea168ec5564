use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfgnav::ScenarioConfig;
use tfgnav_cli::config::{read_file, SEED_ENV};
use tfgnav_cli::{resolve, run_checks, run_experiment, CliError, ExperimentSpec, Overrides};

#[derive(Parser)]
#[command(
    name = "tfgnav",
    version,
    about = "Two-frame group Kalman filtering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo alignment experiment.
    Simulate(ExperimentArgs),
    /// Run the alignment experiment with the 200 degree attitude prior.
    Table1(ExperimentArgs),
    /// Run the randomized property suites and print pass/fail per check.
    Check {
        /// Random draws per suite.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = tfgnav::sim::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key = value config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Initial attitude standard deviation, degrees.
    #[arg(long = "sigma-att0", value_name = "DEG")]
    sigma_att0: Option<f64>,
    /// Number of Monte-Carlo runs.
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    runs: Option<i64>,
    /// Master seed; overrides NAV_SEED and the config file.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Comma-separated subset of tfg_iekf, imperfect_iekf, ekf.
    #[arg(long, value_name = "LIST")]
    filters: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write per-run time series under runs/.
    #[arg(long)]
    timeseries: bool,
    /// Worker threads.
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    workers: Option<i64>,
}

fn experiment(args: ExperimentArgs, preset: ScenarioConfig) -> Result<bool, CliError> {
    let file = args.config.as_deref().map(read_file).transpose()?;
    let env_seed = std::env::var(SEED_ENV).ok();
    let flags = Overrides {
        sigma_att0_deg: args.sigma_att0,
        runs: args.runs,
        seed: args.seed,
        filters: args.filters,
        output_dir: args.out,
        timeseries: args.timeseries,
        workers: args.workers,
    };
    let base = ExperimentSpec {
        scenario: preset,
        ..ExperimentSpec::default()
    };
    let spec = resolve(base, file.as_deref(), env_seed.as_deref(), &flags)?;
    let outcome = run_experiment(&spec, &mut std::io::stdout().lock())?;
    Ok(outcome.complete(&spec))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => experiment(args, ScenarioConfig::default()),
        Command::Table1(args) => experiment(args, ScenarioConfig::table1()),
        Command::Check { samples, seed } => {
            run_checks(samples, seed, &mut std::io::stdout().lock())
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
