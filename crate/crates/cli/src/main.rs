use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use ptkrein_cli::commands::{verify_report, ExitCode};
use ptkrein_cli::config::load_config;

#[derive(Parser)]
#[command(name = "ptkrein", version, about = "PT-symmetric NLS stationary states, spectra and Krein signatures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured parameter sweep and write CSV artifacts.
    Run { config: PathBuf },
    /// Compare Newton solutions against the closed-form Scarf II state.
    Verify { config: PathBuf },
    /// Solve one state and write its linearization spectrum.
    Spectrum { config: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let path = match &cli.command {
        Command::Run { config } | Command::Verify { config } | Command::Spectrum { config } => config.clone(),
    };
    let cfg = match load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(ExitCode::ConfigError.code());
        }
    };
    let code = match cli.command {
        Command::Run { .. } => match ptkrein_cli::run(&cfg) {
            Ok(out) => {
                if let Some(run) = &out.run {
                    for e in &run.events {
                        println!(
                            "{:<24} {}={:.6}  signatures ({}, {})",
                            e.kind.as_str(),
                            run.axis.as_str(),
                            e.param_at,
                            e.pre_signatures.0.map_or("?".into(), |s| s.to_string()),
                            e.pre_signatures.1.map_or("?".into(), |s| s.to_string()),
                        );
                    }
                }
                if let Some(t) = &out.manifest.truncated {
                    eprintln!("run truncated: {t}");
                }
                out.exit
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::ConfigError
            }
        },
        Command::Verify { .. } => match ptkrein_cli::verify(&cfg) {
            Ok(rows) => {
                print!("{}", verify_report(&rows));
                if rows.iter().all(|r| r.passed) {
                    ExitCode::Success
                } else {
                    ExitCode::VerifyFailed
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::ConfigError
            }
        },
        Command::Spectrum { .. } => match ptkrein_cli::spectrum(&cfg) {
            Ok((code, path)) => {
                if code == ExitCode::Success {
                    println!("wrote {}", path.display());
                }
                code
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::ConfigError
            }
        },
    };
    process::exit(code.code());
}
