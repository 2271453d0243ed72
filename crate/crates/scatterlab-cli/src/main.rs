//! Command line front end.
//!
//! Exit codes: 0 success, 1 check failure, 2 numeric error, 3 config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scatterlab_cli::runner::{run_scenario, RunError};
use scatterlab_cli::scenario::{builtin_scenarios, find_builtin, Scenario};

#[derive(Parser)]
#[command(
    name = "scatterlab",
    about = "Scenario-driven numerical laboratory for Schrödinger scattering theory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (a JSON file path or a built-in name).
    Run {
        scenario: String,
        /// Output directory (default: $SCATTERLAB_OUT or ./scatterlab-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in scenarios.
    List,
    /// Parse and validate a scenario file without running it.
    Validate { scenario_file: PathBuf },
}

fn out_root(cli_out: Option<PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| std::env::var_os("SCATTERLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("scatterlab-out"))
}

fn load_scenario(spec: &str) -> Result<Scenario, ExitCode> {
    let path = PathBuf::from(spec);
    if path.extension().is_some() || path.exists() {
        match Scenario::from_file(&path) {
            Ok(s) => Ok(s),
            Err(e) => {
                eprintln!("error: {e}");
                Err(ExitCode::from(3))
            }
        }
    } else if let Some(s) = find_builtin(spec) {
        Ok(s)
    } else {
        eprintln!("error: no scenario file or built-in named `{spec}`");
        Err(ExitCode::from(3))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            println!("built-in scenarios:");
            for (s, runtime) in builtin_scenarios() {
                println!("  {:28} {:8} {}", s.name, runtime, s.description);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario_file } => match Scenario::from_file(&scenario_file) {
            Ok(s) => match s.validate() {
                Ok(()) => {
                    println!("ok: scenario `{}` with {} stages", s.name, s.pipeline.len());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::Run {
            scenario,
            out,
            seed,
            threads,
        } => {
            if let Some(n) = threads {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let scenario = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match run_scenario(&scenario, &out_root(out), seed) {
                Ok(report) => {
                    for c in &report.checks {
                        println!(
                            "{} {} — {}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.name,
                            c.detail
                        );
                    }
                    if report.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(RunError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
                Err(RunError::Numeric(e)) => {
                    eprintln!("numeric error: {e}");
                    ExitCode::from(2)
                }
                Err(RunError::Io(e)) => {
                    eprintln!("io error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
