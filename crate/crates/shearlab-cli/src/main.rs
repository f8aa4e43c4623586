//! `shearlab` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on a config or
//! runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shearlab::experiment::{emit_report, run_experiment, write_report, ExperimentConfig, ExperimentKind, ReportFormat};

#[derive(Parser)]
#[command(name = "shearlab", version, about = "Linearized shear-flow experiments around monotone profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve modes by the representation formula and by time stepping.
    Simulate(RunArgs),
    /// Solve the Orr-Sommerfeld resolvent problem.
    Resolvent(RunArgs),
    /// Verify the rescaled Airy kernel bounds.
    KernelVerify(RunArgs),
    /// Scan the limiting-absorption constant kappa.
    LapScan(RunArgs),
    /// Resolvent scan and semigroup envelope of the discretized generator.
    DsrCheck(RunArgs),
    /// Fit dissipation rates, Gevrey bounds and stream power laws over a viscosity sweep.
    FitDecay(RunArgs),
    /// Gevrey bounds of the spectral density.
    ThetaBounds(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files, manifest.json and the report.
    #[arg(long)]
    out: PathBuf,
    /// Report printed to stdout.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Resolvent(a) => (ExperimentKind::Resolvent, a),
        Command::KernelVerify(a) => (ExperimentKind::KernelVerify, a),
        Command::LapScan(a) => (ExperimentKind::LapScan, a),
        Command::DsrCheck(a) => (ExperimentKind::DsrCheck, a),
        Command::FitDecay(a) => (ExperimentKind::FitDecay, a),
        Command::ThetaBounds(a) => (ExperimentKind::ThetaBounds, a),
    };
    let format = match args.format {
        Format::Json => ReportFormat::Json,
        Format::Table => ReportFormat::TextTable,
    };
    let run = ExperimentConfig::load(&args.config).and_then(|cfg| {
        let m = run_experiment(kind, &cfg, &args.out)?;
        write_report(&m, ReportFormat::TextTable, &args.out)?;
        Ok(m)
    });
    match run {
        Ok(m) => {
            print!("{}", emit_report(&m, format));
            if m.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("shearlab {}: {} check(s) failed", kind.command(), m.checks.iter().filter(|c| !c.pass).count());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("shearlab {}: error: {e}", kind.command());
            ExitCode::from(2)
        }
    }
}
