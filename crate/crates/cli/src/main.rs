mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, parse_methods, ConfigError, Experiment, RunConfig};
use run::{run, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Beam design and experiment sweeps for an access point that serves a user
/// while reading a backscatter tag.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampling seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// zf, joint or both (overrides `methods`).
    #[arg(long, global = true)]
    method: Option<String>,
    /// Any config key, as `key=value`. Repeatable; applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment named by the `experiment` key.
    Run,
    /// Detection distance against tag bearing.
    DetectDistance,
    /// Coverage-ratio CDF over sampled user positions.
    Coverage,
    /// Minimum total power against tag bearing at a fixed range.
    PowerSweep,
    /// Array patterns of the designed beams.
    BeamPattern,
    /// Solve one scene and print the design.
    SolveOne {
        /// Also print the conic program of the joint design.
        #[arg(long)]
        dump_program: bool,
    },
}

fn configure(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    let key_err = |key: &str, reason: String| ConfigError::Key {
        key: key.into(),
        reason,
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| key_err(kv, "expected KEY=VALUE".into()))?;
        cfg.set(k.trim(), v).map_err(|r| key_err(k.trim(), r))?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(m) = &cli.method {
        cfg.methods = parse_methods(m).map_err(|r| key_err("method", r))?;
    }
    cfg.experiment = match cli.command {
        Command::Run => cfg.experiment,
        Command::DetectDistance => Experiment::DetectDistance,
        Command::Coverage => Experiment::Coverage,
        Command::PowerSweep => Experiment::PowerSweep,
        Command::BeamPattern => Experiment::BeamPattern,
        Command::SolveOne { dump_program } => {
            cfg.dump_program |= dump_program;
            Experiment::SolveOne
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cfg) {
        Ok(summary) if summary.numerical_failures > 0 => {
            eprintln!(
                "error: {} solver failure(s); partial results written",
                summary.numerical_failures
            );
            ExitCode::from(EXIT_NUMERICAL)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
