//! `swdlsim`: analytic sweeps, circuit simulations and reference runs
//! for the switched delay-line circulator.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use config::Format;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "swdlsim", version, about = "Switched delay-line circulator simulator")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML file of dotted keys; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory. Falls back to `output.dir`, then `$SWDLSIM_OUT`, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated output formats (csv, svg).
    #[arg(long, value_delimiter = ',', value_parser = Format::parse)]
    format: Option<Vec<Format>>,
}

fn run(args: Args) -> Result<(), CliError> {
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::Validation("--jobs: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    }
    let cfg = config::load(args.config.as_deref())?;
    let out = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("SWDLSIM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let formats = args.format.unwrap_or_else(|| cfg.formats.clone());
    let report = commands::run(args.command, &cfg)?;
    for path in output::write_all(&out, &report.tables, &formats)? {
        println!("wrote {}", path.display());
    }
    for note in report.notes {
        println!("{note}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swdlsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
