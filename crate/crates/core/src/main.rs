use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spin_decohere::bench::{self, ConfigErrorKind, Mode, RunConfig};
use spin_decohere::oracle::ExactParams;
use spin_decohere::Error;

#[derive(Parser)]
#[command(name = "spin-decohere", version, about = "Central-spin decoherence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a key=value config file.
    Run {
        config: PathBuf,
        /// Override a config key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write CSV here instead of the config's `output` (or stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Suppress the summary on stderr.
        #[arg(long)]
        quiet: bool,
    },
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIMENSION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DenseCapExceeded { .. } | Error::SizeOverflow { .. } => EXIT_DIMENSION,
        Error::Io(_) => EXIT_IO,
        Error::Numerical(_) | Error::SeedFailed { .. } | Error::BesselOrderTooSmall { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_CONFIG,
    }
}

fn emit(output: Option<&PathBuf>, csv: &str) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, csv).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn execute(cfg: &RunConfig, output: Option<&PathBuf>, quiet: bool) -> Result<(), Error> {
    match cfg.mode {
        Mode::Trajectory => {
            let (tr, summary) = bench::trajectory(cfg)?;
            emit(output, &bench::trajectory_csv(&tr))?;
            if !quiet {
                eprintln!(
                    "{}: {} samples, final norm {:.15}, {:.3}s",
                    cfg.spec().label(),
                    summary.rows,
                    summary.final_norm,
                    summary.wall_seconds
                );
            }
        }
        Mode::Benchmark => {
            let report = bench::benchmark(cfg)?;
            emit(output, &report.to_csv())?;
            if !quiet {
                eprint!("{}", report.to_table());
            }
        }
        Mode::Average => {
            let avg = bench::average(cfg)?;
            let exact = ExactParams::from_model(&cfg.model);
            emit(output, &bench::average_csv(&avg, exact.as_ref()))?;
            if !quiet {
                eprintln!(
                    "{}: averaged {} seeds over {} samples",
                    cfg.spec().label(),
                    avg.seeds,
                    avg.times.len()
                );
            }
        }
    }
    Ok(())
}

/// Runs one `run` command and returns its exit status.
fn run(config: &Path, set: &[String], output: Option<PathBuf>, quiet: bool) -> u8 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    let cfg = match bench::parse_config(&text, set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return if e.kind == ConfigErrorKind::DimensionCap {
                EXIT_DIMENSION
            } else {
                EXIT_CONFIG
            };
        }
    };
    let output = output.or_else(|| cfg.output.clone());
    match execute(&cfg, output.as_ref(), quiet) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        set,
        output,
        quiet,
    } = Cli::parse().command;
    ExitCode::from(run(&config, &set, output, quiet))
}
