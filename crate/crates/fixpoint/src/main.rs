use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fixpoint::config::LoadedConfig;
use fixpoint::{runner, verify, Result};

/// Accelerated fixed-point and proximal-point experiments.
#[derive(Parser)]
#[command(name = "fixpoint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write one CSV per solver plus manifest.json.
    Run { config: PathBuf },
    /// Check solver properties on seeded random problems.
    Verify { config: PathBuf },
    /// Write the experiment's problem instance as JSON.
    ExportInstance { config: PathBuf },
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config } => {
            let summary = runner::run(&LoadedConfig::load(&config)?)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Verify { config } => {
            let results = verify::verify(&LoadedConfig::load(&config)?)?;
            if results.is_empty() {
                eprintln!("warning: 0 properties run");
            }
            for r in &results {
                println!("{}", r.line());
            }
            verify::summarize(&results)?;
        }
        Command::ExportInstance { config } => {
            for f in runner::export_instance(&LoadedConfig::load(&config)?)? {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
