use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use exoeval_cli::commands;
use exoeval_cli::config::ToolkitConfig;
use exoeval_core::loadcell::Condition;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "exoeval",
    version,
    about = "Desk-scale evaluation toolkit for exoskeleton cuff interface forces"
)]
struct Cli {
    /// Toolkit configuration file (TOML); defaults match the evaluation
    /// protocol.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session artifact directory.
    Simulate {
        /// Session spec (TOML); omitted means the standard 300 s task.
        spec: Option<PathBuf>,
        /// Override the spec's random seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "session", value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the static-weight verification protocol against a simulated cell.
    Calibrate {
        /// Known masses in kg, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 10.0, value_name = "SECONDS")]
        trial_s: f64,
        /// Sensor noise, standard deviation in counts.
        #[arg(long, default_value_t = 3.0)]
        noise_counts: f64,
        #[arg(long, value_enum, default_value_t = CushionArg::WithoutCushion)]
        condition: CushionArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Convert, filter, and segment one session directory into a cycle
    /// ensemble.
    Process {
        session: PathBuf,
        /// Worker threads for per-channel EMG conditioning.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Correlate interface force with assistance and muscle activations.
    Correlate {
        ensemble: PathBuf,
        /// Subject tag for the report rows.
        #[arg(long, default_value = "s1")]
        subject: String,
        /// Load tag in kg for the report rows.
        #[arg(long, default_value_t = 10.0)]
        load: f64,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Summarize report CSVs as a table; optionally emit plot-data panels.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Ensemble CSV to render into per-panel profile data.
        #[arg(long, value_name = "CSV")]
        ensemble: Option<PathBuf>,
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CushionArg {
    #[value(name = "without_cushion")]
    WithoutCushion,
    #[value(name = "with_cushion")]
    WithCushion,
}

impl From<CushionArg> for Condition {
    fn from(arg: CushionArg) -> Self {
        match arg {
            CushionArg::WithoutCushion => Condition::BareCell,
            CushionArg::WithCushion => Condition::WithCushion,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ToolkitConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate { spec, seed, out } => {
            commands::simulate::run(&cfg, spec.as_deref(), seed, &out)?;
        }
        Command::Calibrate {
            weights,
            trials,
            trial_s,
            noise_counts,
            condition,
            seed,
            out,
        } => {
            commands::calibrate::run(
                &cfg,
                &weights,
                trials,
                trial_s,
                noise_counts,
                condition.into(),
                seed,
                &out,
            )?;
        }
        Command::Process { session, jobs, out } => {
            commands::process::run(&cfg, &session, jobs, &out)?;
        }
        Command::Correlate {
            ensemble,
            subject,
            load,
            out,
        } => {
            commands::correlate::run(&cfg, &ensemble, &subject, load, &out)?;
        }
        Command::Report {
            reports,
            ensemble,
            out,
        } => {
            commands::report::run(&reports, ensemble.as_deref(), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
