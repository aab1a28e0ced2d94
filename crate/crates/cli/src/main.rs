use clap::{Parser, Subcommand};
use minlut_cli::commands;
use minlut_cli::config::load_config;
use minlut_cli::CliResult;
use std::path::PathBuf;
use std::process::ExitCode;

/// Finite-alphabet (min-LUT) LDPC decoder design and simulation.
#[derive(Parser)]
#[command(name = "minlut", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design a decoder from a [design] config section and write its spec.
    Design {
        /// Config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override config values: --set design.ebn0_db=4.2
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Spec output path (overrides design.output).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Noise-threshold bisection for one or more tree structures.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write per-tree results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo FER/BER sweep; writes a CSV of per-SNR counters.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// CSV output path (overrides simulate.output).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (overrides simulate.workers and MINLUT_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print a designed decoder spec in human-readable form.
    Inspect {
        /// Decoder spec file.
        spec: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Design {
            config,
            set,
            output,
        } => {
            let cfg = load_config(&config, &set)?;
            let report = commands::cmd_design(&cfg, output)?;
            print!("{}", report.text);
        }
        Cmd::Threshold { config, set, csv } => {
            let cfg = load_config(&config, &set)?;
            print!("{}", commands::cmd_threshold(&cfg, csv)?);
        }
        Cmd::Simulate {
            config,
            set,
            output,
            workers,
        } => {
            let cfg = load_config(&config, &set)?;
            let report = commands::cmd_simulate(&cfg, output, workers)?;
            print!("{}", report.text);
        }
        Cmd::Inspect { spec } => {
            print!("{}", commands::cmd_inspect(&spec)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
