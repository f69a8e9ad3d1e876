//! `cbsopt`: offline delay-bound optimization and online admission
//! control for CBS TSN networks.

mod ops;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbsopt::Error;

#[derive(Parser)]
#[command(name = "cbsopt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive per-queue delay bounds for a network and static flow set.
    Optimize(ops::OptimizeArgs),
    /// Replay a flow add/remove event list against frozen bounds.
    Admit(ops::AdmitArgs),
    /// Run one of the benchmark experiment presets.
    Benchmark(ops::BenchmarkArgs),
    /// Re-run a command from its manifest, reproducing the result tables.
    Rerun(ops::RerunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pso,
    Ga,
    Es,
    Intuitive,
    Ipso,
    Iga,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Uniform,
    Individual,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CommonArgs {
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for parallel evaluation (results do not depend on
    /// this).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Unsupported(_) => 1,
        Error::Parse(_)
        | Error::Validation(_)
        | Error::UnknownFlow(_)
        | Error::DuplicateFlow(_)
        | Error::Io(_) => 2,
        Error::Infeasible(_)
        | Error::Instability { .. }
        | Error::NoPath { .. }
        | Error::Intractable(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // keep help/version on stdout with success, usage errors on
            // stderr with exit code 1
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    let result = match cli.command {
        Command::Optimize(args) => ops::run_optimize(&args),
        Command::Admit(args) => ops::run_admit(&args),
        Command::Benchmark(args) => ops::run_benchmark(&args),
        Command::Rerun(args) => ops::run_rerun(&args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
