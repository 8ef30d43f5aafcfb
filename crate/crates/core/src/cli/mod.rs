//! The `aia` command-line front end.
//!
//! Every subcommand writes into its `--out` directory together with a
//! `manifest.json` describing the run. Settings come from built-in
//! defaults, then the `--config` TOML file, then flags.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{
    load_config, parse_config, AttackSection, Config, DataConfig, EvalConfig, KappaMode, MaskName, ModelConfig, Preset,
    RuleName,
};
pub use manifest::{ArtifactDir, RunManifest, LOCK_FILE, MANIFEST_FILE};

use crate::error::Result;
use crate::models::ArchKind;

#[derive(Debug, Parser)]
#[command(name = "aia", version, about = "Targeted adversarial attacks on skeleton-sequence regressors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic interaction dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        per_category: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        joints: Option<usize>,
    },
    /// Convert an SBU skeleton tree to the dataset format.
    Import {
        #[command(flatten)]
        common: Common,
        /// Root of the extracted SBU release.
        #[arg(long)]
        sbu: PathBuf,
        /// Accept trailing commas and out-of-range values.
        #[arg(long)]
        lenient: bool,
    },
    /// Train a regressor on the non-held-out records.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        model: Option<ArchKind>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Attack one held-out sample toward one target reaction.
    Attack {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Index into the held-out pairs.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        /// Target reaction label.
        #[arg(long)]
        objective: String,
        /// Explicit tolerance, overriding the configured κ mode.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// White-box ε sweep over the held-out pairs.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Restrict to these target reactions.
        #[arg(long)]
        objective: Vec<String>,
        /// Name used in reports; defaults to the architecture.
        #[arg(long)]
        name: Option<String>,
    },
    /// Replay adversarial inputs from `eval` sweeps against other models.
    Transfer {
        #[command(flatten)]
        common: Common,
        /// `sweep.json` written by `eval`.
        #[arg(long, required = true)]
        sweep: Vec<PathBuf>,
        /// Receiving model as `NAME=CHECKPOINT` or a bare checkpoint path.
        #[arg(long, required = true)]
        receiver: Vec<String>,
    },
    /// Write per-frame joint coordinates as CSV for plotting.
    Export {
        #[command(flatten)]
        common: Common,
        /// `attack.json` written by `attack`.
        #[arg(long, conflicts_with = "data")]
        attack: Option<PathBuf>,
        #[arg(long, requires = "record")]
        data: Option<PathBuf>,
        #[arg(long)]
        record: Option<usize>,
    },
}

/// Attack overrides shared by `attack` and `eval`.
#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_parser = parse_kind)]
    pub model: Option<ArchKind>,
    /// Perturbation radius; for `eval` this replaces the ε grid.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub update_rule: Option<RuleName>,
    #[arg(long, value_enum)]
    pub mask: Option<MaskName>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PresetArg {
    Tiny,
    Full,
}

fn parse_kind(s: &str) -> std::result::Result<ArchKind, String> {
    s.parse::<ArchKind>().map_err(|e| e.to_string())
}

/// Parse `args` (including the program name) and run the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| crate::Error::Config(e.to_string()))?;
    commands::run(cli)
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
