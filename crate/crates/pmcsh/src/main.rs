//! Thin command-line front end around the library's scenario runner.
//!
//! Exit codes: 0 success, 1 runtime/model error, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pmcsh::cli::{
    load_scenario, preset_text, run_scenario, sweep, ConfigError, SweepAxis, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "pmcsh", about = "Polarization-multiplexed-carrier self-homodyne link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report artifacts.
    Run {
        /// Scenario config file (TOML key/value text).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Preset name; config values override preset values.
        #[arg(long)]
        preset: Option<String>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $PMCSH_OUT or ./pmcsh_out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario per value along a parameter axis.
    Sweep {
        /// Axis: osnr | baud | drift_rate | length.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default scenario with all keys documented.
    PrintDefaults,
}

fn out_dir(arg: Option<PathBuf>) -> PathBuf {
    arg.or_else(|| std::env::var_os("PMCSH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pmcsh_out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(AppError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

enum AppError {
    Config(ConfigError),
    Run(pmcsh::Error),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<pmcsh::Error> for AppError {
    fn from(e: pmcsh::Error) -> Self {
        AppError::Run(e)
    }
}

fn execute(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            out,
        } => {
            let scenario = load_scenario(preset.as_deref(), config.as_deref(), seed)?;
            let dir = out_dir(out);
            let report = run_scenario(&scenario, &dir)?;
            println!(
                "ber {:.3e}  evm {:.2} dB  extinction {:.2} dB  iterations {}  converged {}",
                report.metrics.ber,
                report.metrics.evm_db,
                report.extinction_final_db,
                report.controller.iterations,
                report.controller.converged,
            );
            println!("report: {}", report.files.report.display());
            Ok(())
        }
        Command::Sweep {
            axis,
            values,
            config,
            preset,
            seed,
            out,
        } => {
            let axis = SweepAxis::parse(&axis).ok_or_else(|| {
                ConfigError::Usage(format!(
                    "unknown axis '{axis}' (osnr | baud | drift_rate | length)"
                ))
            })?;
            let values: Vec<f64> = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| ConfigError::Usage(format!("bad axis value '{v}'")))
                })
                .collect::<Result<_, _>>()?;
            let scenario = load_scenario(preset.as_deref(), config.as_deref(), seed)?;
            let dir = out_dir(out);
            let points = sweep(&scenario, axis, &values, &dir)?;
            for p in &points {
                match (&p.error, p.ber) {
                    (Some(e), _) => println!("{} = {:>12.4e}  FAILED: {e}", axis.label(), p.value),
                    (None, Some(ber)) => println!(
                        "{} = {:>12.4e}  ber {ber:.3e}  extinction {:.2} dB",
                        axis.label(),
                        p.value,
                        p.extinction_db.unwrap_or(f64::NAN)
                    ),
                    _ => {}
                }
            }
            println!("table: {}", dir.join("sweep.csv").display());
            Ok(())
        }
        Command::PrintDefaults => {
            print!("{}", preset_text("sim50g").expect("embedded preset"));
            println!("\n# Available presets: {}", PRESET_NAMES.join(", "));
            Ok(())
        }
    }
}
