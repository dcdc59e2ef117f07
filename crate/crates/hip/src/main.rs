use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hip::runner::{run, RunOptions};
use hip::scenario::load_scenario;

/// Replay a scenario transcript against the simulated task contract.
#[derive(Parser)]
#[command(name = "hip-sim", version)]
struct Cli {
    /// Path to the scenario file (one instruction per line).
    scenario: PathBuf,

    /// Write the report here instead of only printing it.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Record the state hash after every instruction.
    #[arg(long)]
    hash_each: bool,

    /// Suppress the report on stdout.
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let transcript = match load_scenario(&cli.scenario) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let report = run(
        &transcript,
        &RunOptions { hash_per_instruction: cli.hash_each },
    );
    let rendered = report.render();
    if let Some(path) = &cli.output {
        if let Err(err) = std::fs::write(path, &rendered) {
            eprintln!("error: failed to write {}: {err}", path.display());
            return ExitCode::from(2);
        }
    }
    if !cli.quiet {
        print!("{rendered}");
    }
    // individual rejected instructions do not affect the exit code
    ExitCode::SUCCESS
}
