//! `telescope`: run optimizers, build the slow-convergence instance, audit
//! traces against the refined complexity bound, fit exponents and plot.
//!
//! Exit status: 0 success, 1 a check failed, 2 bad input, 3 oracle or
//! solver failure.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{audit, fit, hard_instance, plot, run};
use config::ConfigFile;
use error::{CliError, Verdict};

#[derive(Debug, Parser)]
#[command(name = "telescope", version, about)]
struct Cli {
    /// JSON config keyed by subcommand; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an optimizer and write its trace and summary.
    Run(run::RunArgs),
    /// Check a trace against the decrease and growth hypotheses and the bound.
    Audit(audit::AuditArgs),
    /// Build the instance, export knots and curves, optionally replicate.
    HardInstance(hard_instance::HardInstanceArgs),
    /// Fit the log-log exponent of k(eps).
    Fit(fit::FitArgs),
    /// Emit the three-panel figure of f, f' and f''.
    Plot(plot::PlotArgs),
}

fn dispatch(cli: Cli) -> Result<Verdict, CliError> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Run(a) => run::execute(a, &file),
        Command::Audit(a) => audit::execute(a, &file),
        Command::HardInstance(a) => hard_instance::execute(a, &file),
        Command::Fit(a) => fit::execute(a, &file),
        Command::Plot(a) => plot::execute(a, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(verdict) => verdict.exit_code(),
        Err(e) => {
            eprintln!("telescope: {e}");
            e.exit_code()
        }
    }
}
