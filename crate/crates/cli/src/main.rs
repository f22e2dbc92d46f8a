use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use curvlab_cli::{execute, Command, Format};

/// Geometry, nonexistence criteria and radial solves for the conformal
/// scalar curvature equation on rotationally symmetric manifolds.
#[derive(Debug, Parser)]
#[command(name = "curvlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// INI configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for the Monte Carlo spot check.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = std::panic::catch_unwind(|| {
        execute(
            cli.command,
            &cli.config,
            cli.out.as_deref(),
            cli.format,
            cli.seed,
        )
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("curvlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("curvlab: internal failure");
            ExitCode::from(2)
        }
    }
}
