use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_cli::presets::{preset, PRESET_NAMES};
use ris_cli::runner::{run, Overrides};
use ris_cli::CliError;
use ris_core::montecarlo::Scheme;

#[derive(Parser)]
#[command(
    name = "ris-sim",
    version,
    about = "RIS link simulator with realistic reflection coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML config file.
    Run {
        /// Preset name or path to a config file.
        target: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Number of RIS elements.
        #[arg(long)]
        m: Option<usize>,
        /// continuous, group_query, nearest_phase or exhaustive.
        #[arg(long)]
        method: Option<Scheme>,
        /// Comma-separated channel labels to keep.
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<String>>,
    },
    /// List the presets.
    Presets,
    /// Print a preset as a TOML config.
    Show { preset: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            target,
            out,
            seed,
            trials,
            m,
            method,
            channels,
        } => {
            let overrides = Overrides {
                seed,
                trials,
                elements: m,
                method,
                channels,
            };
            let (_, manifest) = run(&target, &out, &overrides)?;
            for f in &manifest.files {
                println!("wrote {}", out.join(&f.name).display());
            }
            for (k, v) in &manifest.derived {
                println!("{k} = {v:.4}");
            }
        }
        Command::Presets => {
            for p in PRESET_NAMES {
                println!("{p}");
            }
        }
        Command::Show { preset: name } => {
            let cfg = preset(&name)
                .ok_or_else(|| CliError::Config(format!("unknown preset `{name}`")))?;
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(())
}
