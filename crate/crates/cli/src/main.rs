use std::path::PathBuf;
use std::process::ExitCode;

use aggrekin_cli::{run_aggregate, run_kinetic, run_study, scenario_table, ConfigKeys, RunKind, SimConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aggrekin", version, about = "1-D chemotactic aggregation: aggregate and kinetic solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dirac-mass aggregate dynamics with merging.
    Aggregate(RunArgs),
    /// Two-velocity kinetic model at the first eps of eps_list.
    Kinetic(RunArgs),
    /// Kinetic runs for every eps compared with the aggregate solution.
    Study(RunArgs),
    /// List the built-in scenarios.
    Scenarios,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file of flat `key = value` settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    keys: ConfigKeys,
}

fn resolve(args: RunArgs, kind: RunKind) -> anyhow::Result<SimConfig> {
    let base = match &args.config {
        Some(path) => ConfigKeys::from_file(path)?,
        None => ConfigKeys::default(),
    };
    Ok(SimConfig::resolve(&base.overlay(args.keys), kind)?)
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Aggregate(args) => report(&run_aggregate(&resolve(args, RunKind::Aggregate)?)?),
        Command::Kinetic(args) => report(&run_kinetic(&resolve(args, RunKind::Kinetic)?)?),
        Command::Study(args) => {
            let (files, rows) = run_study(&resolve(args, RunKind::Study)?)?;
            for r in rows {
                println!("eps={} W1={} flux_gap={}", r.eps, r.w1, r.flux_gap);
            }
            report(&files);
        }
        Command::Scenarios => print!("{}", scenario_table()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
