//! Command-line front end for `lagfib-core`.
//!
//! Every subcommand returns a JSON document under the `lagfib.v1` envelope
//! or, where it has a tabular form, CSV. Output bytes depend only on the
//! arguments and the seed.

pub mod args;
pub mod commands;
pub mod config;
pub mod criteria;
pub mod emit;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, FromArgMatches, Parser};

pub use error::{CliError, CliResult, ErrorKind};

/// Rendered output of one invocation.
#[derive(Debug, Clone)]
pub struct Executed {
    pub bytes: Vec<u8>,
    /// 0, or 4 when `check` reported a failing criterion.
    pub exit_code: i32,
    pub out: Option<std::path::PathBuf>,
}

/// Parses, runs and renders. `threads` overrides `LAGFIB_THREADS`.
pub fn execute<I, T>(argv: I, threads: Option<usize>) -> CliResult<Executed>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = config::merge_config(argv)?;
    let matches = args::Cli::command()
        .try_get_matches_from(argv)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let cli = args::Cli::from_arg_matches(&matches).map_err(|e| CliError::usage(e.to_string()))?;
    let cfg = config::RunConfig::resolve(&cli.common, config::subcommand_settings(&matches))?;
    let name = cli.command.name();
    let output = commands::run(&cli.command, &cfg, threads)?;
    let bytes = emit::render(name, &cfg, &output)?;
    Ok(Executed {
        bytes,
        exit_code: if output.failed { ErrorKind::CheckFailed.exit_code() } else { 0 },
        out: cli.common.out.clone(),
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = args::Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind as K;
        if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
            let _ = e.print();
            return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
        }
    }
    match execute(argv, None).and_then(write_output) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn write_output(run: Executed) -> CliResult<i32> {
    match &run.out {
        Some(path) => std::fs::write(path, &run.bytes)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&run.bytes)?;
            stdout.flush()?;
        }
    }
    Ok(run.exit_code)
}
