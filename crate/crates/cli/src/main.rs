use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use antnet::config::{load_config, parse_grid, RunConfig};
use antnet::harness::{
    dump_network, run_meanfield, run_sweep, theory_csv, theory_table, CellStatus, SweepOptions,
    OUT_DIR_ENV,
};
use clap::{Args, Parser, Subcommand};

/// Ant colony optimisation of an infinite-range Ising model.
#[derive(Parser)]
#[command(name = "antnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides the config file and the environment.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep (colony, mean-field, or both).
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Skip cells that finished in an earlier run.
        #[arg(long)]
        resume: bool,
    },
    /// Integrate the mean-field SDE over the configured grid.
    Meanfield {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the fixed-point table as CSV.
    Theory {
        #[arg(long = "J", allow_hyphen_values = true)]
        coupling: f64,
        #[arg(long = "h", allow_hyphen_values = true)]
        field: f64,
        /// `lo:hi:step`
        #[arg(long)]
        alpha_grid: String,
    },
    /// Write the frozen network for one omega.
    DumpNetwork {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Destination file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(antnet::Error),
    Run(antnet::Error),
}

impl From<antnet::Error> for Failure {
    fn from(e: antnet::Error) -> Self {
        Failure::Run(e)
    }
}

fn load(args: &RunArgs, resume: bool) -> Result<(RunConfig, SweepOptions), Failure> {
    let config = load_config(&args.config).map_err(Failure::Config)?;
    config.validate().map_err(Failure::Config)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone());
    let opts = SweepOptions {
        threads: args.threads,
        resume,
        out_dir,
    };
    Ok((config, opts))
}

fn meanfield(config: &RunConfig, opts: &SweepOptions) -> Result<(), Failure> {
    let report = run_meanfield(config, opts)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.cells {
        eprintln!(
            "meanfield omega={} alpha={} m={:.4}",
            c.omega, c.alpha, c.m_mean
        );
    }
    Ok(())
}

/// Returns the number of failed cells.
fn simulate(config: &RunConfig, opts: &SweepOptions) -> Result<usize, Failure> {
    let mut failed = 0;
    if config.mode.runs_colony() {
        let report = run_sweep(config, opts)?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        for c in &report.cells {
            match &c.status {
                CellStatus::Done { cell, reused } => eprintln!(
                    "cell omega={} alpha={} m={:.4} p={:.2} {:.1}s{}",
                    c.omega,
                    c.alpha,
                    cell.m_mean,
                    cell.success_probability,
                    c.elapsed.as_secs_f64(),
                    if *reused { " (resumed)" } else { "" }
                ),
                CellStatus::Failed(e) => {
                    eprintln!("cell omega={} alpha={} FAILED: {e}", c.omega, c.alpha)
                }
            }
        }
        failed = report.failed();
    }
    if config.mode.runs_meanfield() {
        meanfield(config, opts)?;
    }
    Ok(failed)
}

fn run(cli: Cli) -> Result<usize, Failure> {
    match cli.command {
        Command::Simulate { run, resume } => {
            let (config, opts) = load(&run, resume)?;
            simulate(&config, &opts)
        }
        Command::Meanfield { run } => {
            let (config, opts) = load(&run, false)?;
            meanfield(&config, &opts).map(|_| 0)
        }
        Command::Theory {
            coupling,
            field,
            alpha_grid,
        } => {
            let alphas = parse_grid(&alpha_grid).map_err(Failure::Config)?;
            let points = theory_table(coupling, field, &alphas).map_err(Failure::Config)?;
            io::stdout()
                .write_all(theory_csv(&points).as_bytes())
                .map_err(|e| Failure::Run(e.into()))?;
            Ok(0)
        }
        Command::DumpNetwork { config, omega, out } => {
            let config = load_config(&config).map_err(Failure::Config)?;
            config.validate().map_err(Failure::Config)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|e| Failure::Run(e.into()))?;
                    dump_network(&config, omega, io::BufWriter::new(file))
                }
                None => dump_network(&config, omega, io::BufWriter::new(io::stdout().lock())),
            }
            .map_err(Failure::Config)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} cell(s) failed");
            ExitCode::from(2)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
