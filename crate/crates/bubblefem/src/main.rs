use std::path::PathBuf;
use std::process::ExitCode;

use bubblefem::config::{ConfigFile, GlobalOverrides, Overrides};
use bubblefem::{run, CliError, CommandKind, RunConfig};
use clap::{Parser, Subcommand};

/// Least-squares bubble-enriched finite elements for 1D
/// convection-diffusion-reaction problems.
///
/// Settings come from built-in defaults, then `--config`, then flags.
/// Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 failed
/// checks.
#[derive(Debug, Parser)]
#[command(name = "bubblefem", version)]
struct Cli {
    /// JSON config file; keys are the flag names with `_` for `-`
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    global: GlobalOverrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a steady problem and sample the field
    Steady(Overrides),
    /// Integrate the transient problem with a sine initial profile
    Transient(Overrides),
    /// Least-squares bubble coefficients for one element
    Coeff(Overrides),
    /// Reproduce the two-element reference tables
    Tables(Overrides),
    /// Error norms over element counts and enrichments
    Convergence(Overrides),
    /// Run the acceptance checks
    Selftest(Overrides),
}

impl Command {
    fn split(&self) -> (CommandKind, &Overrides) {
        match self {
            Command::Steady(o) => (CommandKind::Steady, o),
            Command::Transient(o) => (CommandKind::Transient, o),
            Command::Coeff(o) => (CommandKind::Coeff, o),
            Command::Tables(o) => (CommandKind::Tables, o),
            Command::Convergence(o) => (CommandKind::Convergence, o),
            Command::Selftest(o) => (CommandKind::Selftest, o),
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let (kind, flags) = cli.command.split();
    let run = file.run.merged(flags);
    let global = file.global.merged(&cli.global);
    RunConfig::resolve(kind, &global, &run)
}

fn main() -> ExitCode {
    // clap exits with 2 on bad flags; that code is reserved for numerical
    // failures here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match resolve(&cli).and_then(|config| run(&config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bubblefem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
