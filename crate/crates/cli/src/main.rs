use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rps_cli::{commands, init_threads, verify, CliError, ExperimentConfig, EXIT_FAILED};

#[derive(Parser)]
#[command(
    name = "rps",
    version,
    about = "Rough-potential Schrödinger experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data and write the trajectory.
    Solve(Common),
    /// Run an ill-posedness oracle sweep and fit its growth law.
    Oracle(Common),
    /// Run the identity and bound suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only the named check.
        #[arg(long)]
        check: Option<String>,
    },
    /// Regularity, derivative-jump and threshold probes.
    Probe(Common),
}

fn run(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    match cli.command {
        Command::Solve(c) => {
            let config = ExperimentConfig::load(&c.config)?;
            let out = config.out_dir(c.out.as_deref());
            let (summary, _) = commands::solve(&config, &out)?;
            println!(
                "mass drift {:.3e}; artifacts in {}",
                summary.mass_drift,
                out.display()
            );
            Ok(0)
        }
        Command::Oracle(c) => {
            let config = ExperimentConfig::load(&c.config)?;
            let out = config.out_dir(c.out.as_deref());
            let table = commands::oracle(&config, &out)?;
            println!(
                "slope {:.6} (expected {}); pass = {}",
                table.fit.slope,
                table
                    .fit
                    .expected_exponent
                    .map_or("n/a".into(), |e| format!("{e:.6}")),
                table.fit.pass
            );
            Ok(0)
        }
        Command::Verify { common, check } => {
            let config = ExperimentConfig::load(&common.config)?;
            let out = config.out_dir(common.out.as_deref());
            let report = verify::verify(&config, &out, check.as_deref())?;
            for c in &report.checks {
                println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
            if report.pass {
                Ok(0)
            } else {
                eprintln!("failing checks: {}", report.failing().join(", "));
                Ok(EXIT_FAILED)
            }
        }
        Command::Probe(c) => {
            let config = ExperimentConfig::load(&c.config)?;
            let out = config.out_dir(c.out.as_deref());
            commands::probe(&config, &out)?;
            println!("artifacts in {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
