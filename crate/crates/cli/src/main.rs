use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use mfgame_cli::{catalogue, load, run, CliError};

/// Numerical experiments for mean-field control under model uncertainty.
#[derive(Parser)]
#[command(name = "mfgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    ///
    /// Exit status is 0 when every check passes, 1 when a check fails or
    /// the run errors, 2 for an invalid config.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// List the available experiments with their defaults.
    List,
}

fn execute(config: PathBuf, output: Option<PathBuf>) -> Result<bool, anyhow::Error> {
    let mut settings = load(&config)?;
    if let Some(dir) = output {
        settings.output_dir = dir;
    }
    let outcome =
        run(&settings).with_context(|| format!("experiment {} failed", settings.experiment))?;
    outcome
        .write(&settings.output_dir)
        .with_context(|| format!("writing to {}", settings.output_dir.display()))?;
    for check in &outcome.checks {
        println!("{}", check.summary());
    }
    println!(
        "{} checks, {} failed; outputs in {}",
        outcome.checks.len(),
        outcome.checks.iter().filter(|c| !c.pass).count(),
        settings.output_dir.display()
    );
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for line in catalogue() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, output } => match execute(config, output) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(e.downcast_ref::<CliError>().map_or(1, CliError::exit_code))
            }
        },
    }
}
