mod cli;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use log::LevelFilter;
use torsion_core::harness::EXIT_CONFIG;

use cli::{Cli, Command};

/// The only environment input: worker threads for the solver pool.
const THREADS_VAR: &str = "TORSION_THREADS";

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| torsion_core::Error::Config(format!("{THREADS_VAR}='{raw}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// A reader such as `head` closing stdout early.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<std::io::Error>()
            .map(|io| io.kind())
            .or_else(|| c.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind()));
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    init_threads()?;
    match &cli.command {
        Command::Radial(a) => commands::radial(a),
        Command::Thresholds(a) => commands::thresholds(a),
        Command::Lowerbound(a) => commands::lowerbound(a),
        Command::Fem(a) => commands::fem(a),
        Command::Verify(a) => commands::verify(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code would collide with "indeterminate"
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG as u8),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => LevelFilter::Warn,
            1 => LevelFilter::Info,
            _ => LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            // anything that stops a run before it yields verdicts is a setup problem
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
