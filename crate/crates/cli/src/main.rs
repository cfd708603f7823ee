use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coxperc::harness::{run_to_dir, ExperimentConfig, PRESETS};
use coxperc::CoxError;

#[derive(Parser)]
#[command(name = "coxperc", version, about = "Cox-driven Boolean model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config (or a preset name).
    Run {
        /// Path to a config file, or the name of a bundled preset.
        config: String,
        /// Rayon thread count; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for CSV/JSON/manifest.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled presets.
    Presets,
}

// exit 0 ok, 2 config/validation error, 3 runtime error
fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(ExitError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(ExitError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum ExitError {
    Validation(String),
    Runtime(String),
}

fn load_config(arg: &str) -> Result<ExperimentConfig, ExitError> {
    let text = if std::path::Path::new(arg).exists() {
        std::fs::read_to_string(arg).map_err(|e| ExitError::Validation(format!("{arg}: {e}")))?
    } else if let Some((_, _, text)) = PRESETS.iter().find(|(n, _, _)| *n == arg) {
        text.to_string()
    } else {
        return Err(ExitError::Validation(format!(
            "{arg}: not a file and not a preset name (see `coxperc presets`)"
        )));
    };
    ExperimentConfig::from_toml(&text).map_err(|e| ExitError::Validation(e.to_string()))
}

fn run() -> Result<(), ExitError> {
    match Cli::parse().command {
        Command::Presets => {
            for (name, desc, _) in PRESETS {
                println!("{name:<22} {desc}");
            }
            Ok(())
        }
        Command::Run {
            config,
            threads,
            seed,
            out,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| ExitError::Validation(format!("--threads: {e}")))?;
            }
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let files = run_to_dir(&cfg, &out).map_err(|e| match e {
                CoxError::Config { .. } | CoxError::InvalidParameter(_) => {
                    ExitError::Validation(e.to_string())
                }
                other => ExitError::Runtime(other.to_string()),
            })?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}
