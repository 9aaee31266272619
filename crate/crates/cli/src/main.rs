//! `sharpfront`: wave speeds, profiles, simulations and diagnostics for
//! bistable reaction-diffusion fronts, driven by a config file.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{exit, Failure, Outcome, Sink};
use config::{Format, RunConfig};

const EXIT_CODES: &str = "\
EXIT CODES
  0  success
  1  file system error
  2  hypothesis violation (includes reactions without a positive-speed wave)
  3  non-convergence: speed bisection, time stepping, or no front in the domain
  4  configuration error
";

#[derive(Parser)]
#[command(name = "sharpfront", version, about, after_long_help = format!("{}\n{EXIT_CODES}", config::REFERENCE))]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Table format; overrides `[output] format`.
    #[arg(long, global = true, value_enum)]
    format: Option<TableFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the reaction hypotheses on a grid; writes hypotheses.json.
    Hypotheses,
    /// Wave speed by bisection; writes speed.json and the y table.
    Speed,
    /// Normalised profile and front endpoints; writes profile.json and the
    /// profile table.
    Profile,
    /// Moving-frame simulation with envelope, energy and shift diagnostics;
    /// writes simulate.json, the trajectory and the series tables.
    Simulate,
    /// Diagnostics of a stored trajectory; writes diagnose.json and the
    /// envelope, energy and shift tables.
    Diagnose {
        /// Trajectory written by `simulate` (binary, or CSV by extension).
        /// Defaults to trajectory.bin in the output directory.
        #[arg(long, value_name = "PATH")]
        trajectory: Option<PathBuf>,
    },
    /// Wave speed over the `[sweep]` grid; writes sweep.json and the table.
    Sweep,
}

fn run(cli: Cli) -> Outcome {
    let path = cli.config.ok_or_else(|| Failure::config("--config PATH is required"))?;
    let cfg = RunConfig::load(&path).map_err(|e| Failure::config(format!("{}:\n{e}", path.display())))?;
    let dir = cli.out.unwrap_or_else(|| cfg.output.dir.clone());
    let format = match cli.format {
        Some(TableFormat::Csv) => Format::Csv,
        Some(TableFormat::Json) => Format::Json,
        None => cfg.output.format,
    };
    let sink = Sink::new(dir.clone(), format)?;
    match cli.command {
        Command::Hypotheses => commands::hypotheses(&cfg, &sink),
        Command::Speed => commands::speed(&cfg, &sink),
        Command::Profile => commands::profile(&cfg, &sink),
        Command::Simulate => commands::simulate_cmd(&cfg, &sink),
        Command::Diagnose { trajectory } => {
            let trajectory = trajectory.unwrap_or_else(|| dir.join("trajectory.bin"));
            commands::diagnose(&cfg, &trajectory, &sink)
        }
        Command::Sweep => commands::sweep(&cfg, &sink),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(done) => {
            print!("{}", done.summary);
            if let Some(note) = done.note {
                eprintln!("sharpfront: {note}");
            }
            ExitCode::from(done.code)
        }
        Err(f) => {
            eprintln!("sharpfront: {}", f.message);
            ExitCode::from(if f.code == exit::OK { exit::IO } else { f.code })
        }
    }
}
