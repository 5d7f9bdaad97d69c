use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use metaline_cli::{run, CliError, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Modes,
    Dynamics,
    Renorm,
    Phase,
    Disorder,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Modes => Command::Modes,
            Sub::Dynamics => Command::Dynamics,
            Sub::Renorm => Command::Renorm,
            Sub::Phase => Command::Phase,
            Sub::Disorder => Command::Disorder,
        }
    }
}

/// Normal modes, qubit dynamics and spin-boson sweeps for hybrid
/// left-handed/right-handed transmission lines.
#[derive(Debug, Parser)]
#[command(name = "metaline", version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, env = "METALINE_THREADS")]
    threads: Option<usize>,
    /// Also write per-node mode profiles (modes only).
    #[arg(long)]
    profiles: bool,
}

fn main_inner(args: Args) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let cfg = RunConfig::load(&args.config)?;
    run(
        args.command.into(),
        &cfg,
        args.out.as_deref(),
        args.profiles,
    )
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("metaline: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
