//! `mhdl`: runs, studies and the lemma harness from a config file.
//!
//! Exit codes: 0 ok, 1 config or I/O, 2 Taylor sign violated, 3 solver failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use clap::{Parser, Subcommand};
use mhdl::config::{parse_config, RunConfig};
use mhdl::run::{run, ExitCode};
use mhdl::studies::{lemma_checks, lemma_report, study, Report, StudyKind};
use mhdl::Error;

#[derive(Parser)]
#[command(name = "mhdl", version, about = "Lagrangian free-boundary MHD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured simulation.
    Run { config: PathBuf },
    /// Run a parameter study: dt-convergence, kappa-sweep, eps-sweep or contraction.
    Study {
        #[arg(value_parser = |s: &str| s.parse::<StudyKind>())]
        kind: StudyKind,
        config: PathBuf,
    },
    /// Report lemma ratios.
    LemmaHarness { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), Error> {
    match &cfg.report {
        Some(p) => report.write(p),
        None => {
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn fail(e: &Error, t: Option<f64>) -> ProcessExit {
    match t {
        Some(t) => eprintln!("mhdl: aborted at t = {t}: {e}"),
        None => eprintln!("mhdl: {e}"),
    }
    ProcessExit::from(ExitCode::of(e) as u8)
}

fn main() -> ProcessExit {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as configuration errors; 2 is reserved.
            return if e.use_stderr() { ProcessExit::from(ExitCode::Config as u8) } else { ProcessExit::SUCCESS };
        }
    };
    let (Command::Run { config } | Command::Study { config, .. } | Command::LemmaHarness { config }) = &cli.command;
    let cfg = match load(config) {
        Ok(c) => c,
        Err(e) => return fail(&e, None),
    };
    let out = match cli.command {
        Command::Run { .. } => match run(&cfg) {
            Ok(s) => {
                println!("completed {} steps to t = {}", s.steps, s.final_state.t);
                Ok(())
            }
            Err(f) => return fail(&f.error, Some(f.t)),
        },
        Command::Study { kind, .. } => study(kind, &cfg).and_then(|r| emit(&r, &cfg)),
        Command::LemmaHarness { .. } => lemma_checks(&cfg).and_then(|c| emit(&lemma_report(&c), &cfg)),
    };
    match out {
        Ok(()) => ProcessExit::SUCCESS,
        Err(e) => fail(&e, None),
    }
}
