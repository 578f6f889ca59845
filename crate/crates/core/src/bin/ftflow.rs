//! `ftflow`: finite/fixed-time stable optimization flows.
//!
//! Subcommands: `run` (trajectories from a config), `sweep` (settling time
//! versus initial-condition magnitude), `reproduce` (seeded figure-style
//! experiments), and `verify` (the built-in verification suite).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ftflow::cli::{cmd_reproduce, cmd_run, cmd_sweep, cmd_verify, exit_code, Figure};

#[derive(Parser)]
#[command(name = "ftflow", version, about = "Finite/fixed-time stable optimization flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory per configured magnitude and write CSVs.
    Run {
        /// Key-value configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure settling time across magnitudes and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded figure-style experiment (fig3a or fig3b).
    Reproduce {
        /// Which experiment: fig3a (composite flow) or fig3b (constrained QP).
        figure: String,
        #[arg(long)]
        out: PathBuf,
        /// Seed of the problem instance and initial conditions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Execute the verification suite and write a pass/fail report.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out).map(|_| true),
        Command::Sweep { config, out } => cmd_sweep(&config, &out).map(|_| true),
        Command::Reproduce { figure, out, seed } => figure
            .parse::<Figure>()
            .and_then(|fig| cmd_reproduce(fig, &out, seed))
            .map(|_| true),
        Command::Verify { out } => cmd_verify(&out).map(|(_, passed)| passed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
