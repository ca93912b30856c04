use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use entchaos_cli::config::ExperimentConfig;
use entchaos_cli::experiments;
use entchaos_cli::runner::{self, OUTPUT_ROOT_ENV};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_ABORTED: u8 = 3;

#[derive(Parser)]
#[command(name = "entchaos", version, about = "Entanglement and chaos in the kicked top and the Dicke model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML file or a shipped name.
    Run { config: String },
    /// Check a configuration without running it.
    Validate { config: String },
    /// List the shipped experiments.
    ListExperiments,
}

fn invalid(config: &str, errors: &[String]) -> ExitCode {
    eprintln!("{}", json!({ "error": "invalid_config", "config": config, "messages": errors }));
    ExitCode::from(EXIT_INVALID)
}

fn load(config: &str) -> Result<(String, ExperimentConfig), ExitCode> {
    let raw = experiments::load(config).map_err(|e| {
        eprintln!("{}", json!({ "error": "io", "message": e.to_string() }));
        ExitCode::from(EXIT_IO)
    })?;
    let cfg = ExperimentConfig::from_toml(&raw).map_err(|e| invalid(config, &e))?;
    let errors = cfg.validate();
    if !errors.is_empty() {
        return Err(invalid(config, &errors));
    }
    Ok((raw, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for (name, _) in experiments::SHIPPED {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(_) => {
                println!("{config}: ok");
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config } => {
            let (raw, cfg) = match load(&config) {
                Ok(x) => x,
                Err(code) => return code,
            };
            let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from);
            let dir = runner::resolve_output_dir(&cfg, root.as_deref());
            match runner::run(&cfg, &raw, &dir) {
                Ok(report) => {
                    println!("{}", report.manifest_path.display());
                    for a in &report.manifest.aborts {
                        eprintln!("{}", json!({ "error": "aborted", "job": a.job, "message": a.error }));
                    }
                    for w in &report.manifest.warnings {
                        eprintln!("warning: {w}");
                    }
                    if report.manifest.aborts.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_ABORTED)
                    }
                }
                Err(e) => {
                    eprintln!("{}", json!({ "error": "io", "message": format!("{e:#}") }));
                    ExitCode::from(EXIT_IO)
                }
            }
        }
    }
}
