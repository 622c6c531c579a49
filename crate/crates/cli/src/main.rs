use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use compcap::commands::{self, MemoryMode, Options};
use compcap::report::RunReport;
use compcap::CliError;

/// Capacity and efficiency of a computer from an instruction-set timing model.
#[derive(Debug, Parser)]
#[command(name = "compcap", version)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Absolute tolerance on the capacity, in bits per time unit.
    #[arg(long, global = true, default_value_t = compcap_core::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Bind a model parameter (repeatable).
    #[arg(long = "param", global = true, value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the capacity of a model.
    Capacity { model: PathBuf },
    /// Capacity-achieving distribution over the model's members.
    Distribution { model: PathBuf },
    /// Efficiency estimates from an observed instruction trace.
    Efficiency {
        model: PathBuf,
        trace: PathBuf,
        /// Highest k-gram order to estimate.
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Exact number of instruction sequences by total time.
    Count {
        model: PathBuf,
        #[arg(long)]
        max_time: usize,
    },
    /// Choose memory cell counts under a budget.
    OptimizeMemory {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Vertex)]
        mode: Mode,
        /// Grid step in cells (grid mode).
        #[arg(long, default_value_t = 1)]
        step: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Vertex,
    Grid,
}

fn run(cli: Cli, echo: Vec<String>) -> Result<RunReport, CliError> {
    let opts = Options::with_params(cli.tolerance, &cli.params)?;
    match cli.command {
        Command::Capacity { model } => commands::capacity(&model, &opts, echo),
        Command::Distribution { model } => commands::distribution(&model, &opts, echo),
        Command::Efficiency { model, trace, order } => commands::efficiency(&model, &trace, order, &opts, echo),
        Command::Count { model, max_time } => commands::count(&model, max_time, &opts, echo),
        Command::OptimizeMemory { problem, mode, step } => {
            let mode = match mode {
                Mode::Vertex => MemoryMode::Vertex,
                Mode::Grid => MemoryMode::Grid,
            };
            commands::optimize_memory(&problem, mode, step, &opts, echo)
        }
    }
}

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let json = cli.json;
    match run(cli, echo) {
        Ok(report) => {
            if json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
