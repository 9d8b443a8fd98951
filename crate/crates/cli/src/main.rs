//! `spinlab`: simulate, analyze and regenerate figure data for a probe spin
//! coupled to two dark electron spins.
//!
//! Exit status: 0 success, 1 runtime failure, 2 bad config or input,
//! 3 Nyquist violation, 4 fit did not converge (partial JSON written).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod figures;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::figures::FigureId;

#[derive(Debug, Parser)]
#[command(name = "spinlab", version, about = "Three-spin cluster simulator and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one protocol and write its trace or spectrum as CSV.
    Simulate(commands::SimulateArgs),
    /// FFT, Lorentzian, multi-sine or full parameter extraction on a CSV.
    Analyze(commands::AnalyzeArgs),
    /// Closed-form SEDOR frequencies, amplitudes and ESR splittings as JSON.
    Analytic(commands::AnalyticArgs),
    /// Data CSV plus gnuplot script for a figure panel.
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
struct FiguresArgs {
    /// 2a, 2b, 3b, 3c, 4a, 4b, s_deerrabi, s_zeeman or all.
    id: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn figures(args: &FiguresArgs) -> Result<Vec<PathBuf>, CliError> {
    let ids = if args.id == "all" { FigureId::ALL.to_vec() } else { vec![args.id.parse()?] };
    let dir = commands::resolve_out(&args.out_dir);
    let mut written = Vec::new();
    for id in ids {
        written.extend(figures::write_figure(id, &dir)?);
    }
    Ok(written)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a).map(|p| vec![p]),
        Command::Analyze(a) => commands::analyze(a).map(|p| vec![p]),
        Command::Analytic(a) => commands::analytic(a).map(|p| p.into_iter().collect()),
        Command::Figures(a) => figures(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinlab: {e}");
            e.exit_code()
        }
    }
}
