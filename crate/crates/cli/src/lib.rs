//! Driver for the `metaline` binary: configuration, subcommands and CSV
//! output.

pub mod commands;
pub mod config;
pub mod csv;
mod error;

use std::path::{Path, PathBuf};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Modes,
    Dynamics,
    Renorm,
    Phase,
    Disorder,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Dynamics => "dynamics",
            Command::Renorm => "renorm",
            Command::Phase => "phase",
            Command::Disorder => "disorder",
        }
    }
}

/// Runs `command` and writes its CSV files to `out_dir` (or the directory
/// named in the config). Returns the paths written.
pub fn run(
    command: Command,
    cfg: &RunConfig,
    out_dir: Option<&Path>,
    profiles: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let tables = match command {
        Command::Modes => commands::cmd_modes(cfg, profiles)?,
        Command::Dynamics => commands::cmd_dynamics(cfg)?,
        Command::Renorm => commands::cmd_renorm(cfg)?,
        Command::Phase => commands::cmd_phase(cfg)?,
        Command::Disorder => commands::cmd_disorder(cfg)?,
    };
    let dir = out_dir.unwrap_or(&cfg.out_dir);
    csv::write_tables(dir, &cfg.stem, command.name(), &cfg.hash, &tables)
}
