//! Command-line drivers for the vasotrans experiments.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, ExperimentKind};

#[derive(Debug, Parser)]
#[command(name = "vasotrans", version, about = "Solute transport in vessels and their surroundings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// Experiment to run with its default configuration.
    experiment: Option<String>,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set time.tau=0.005.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its tables, snapshots and manifest.
    Run(ConfigArgs),
    /// Check a configuration without running it.
    Validate(ConfigArgs),
    /// List the available experiments.
    ListExperiments,
    /// Print the default configuration of an experiment.
    Defaults { experiment: String },
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig, ConfigError> {
    match (&args.config, &args.experiment) {
        (Some(path), name) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
            let mut overrides = args.overrides.clone();
            if let Some(n) = name {
                overrides.insert(0, format!("experiment={n}"));
            }
            ExperimentConfig::from_json(&text, &overrides)
        }
        (None, Some(name)) => match ExperimentKind::parse(name) {
            Some(k) => ExperimentConfig::from_defaults(k, &args.overrides),
            None => Err(ConfigError::Invalid(vec![format!("experiment: unknown experiment {name:?}")])),
        },
        (None, None) => Err(ConfigError::Invalid(vec!["either an experiment name or --config is required".into()])),
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 on an invalid configuration and 1 on a runtime failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::ListExperiments => {
            for k in ExperimentKind::ALL {
                println!("{:<12} {}", k.name(), k.describe());
            }
            0
        }
        Command::Defaults { experiment } => match ExperimentKind::parse(&experiment) {
            Some(k) => {
                println!("{}", serde_json::to_string_pretty(&ExperimentConfig::defaults(k)).expect("serializable"));
                0
            }
            None => {
                eprintln!("unknown experiment {experiment:?}");
                2
            }
        },
        Command::Validate(args) => match load(&args) {
            Ok(_) => {
                println!("configuration is valid");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        Command::Run(args) => {
            let cfg = match load(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return 2;
                }
            };
            match experiments::run_experiment(&cfg) {
                Ok(report) => {
                    for f in &report.files {
                        println!("{}", f.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
    }
}
