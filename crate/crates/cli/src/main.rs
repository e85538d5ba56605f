mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dbk", version, about = "Spectral Galerkin Darcy-Brinkman-Korteweg simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration; exit 0 on completion, 2 on blow-up.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the ledger, metadata and snapshots.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// Repeat a run over a range of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `param:lo:hi:n` with param in kappa, d, delta_hat, gamma, mu_e, R.
        #[arg(long)]
        vary: String,
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => commands::run(&config, &out),
        Command::Verify { suite } => commands::verify(&suite),
        Command::Sweep { config, vary, report } => commands::sweep(&config, &vary, &report),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
