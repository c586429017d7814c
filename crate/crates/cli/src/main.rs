//! `dotprods` command-line entry point.
//!
//! Exit codes: 0 success, 1 a verified inequality failed, 2 usage or input
//! error.

mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Invocation};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let invocation = match Invocation::from_cli(cli) {
        Ok(invocation) => invocation,
        Err(e) => return fail(&e),
    };
    eprint!("# effective config\n{}", invocation.to_toml());
    match run::run(&invocation) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.report.as_bytes());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &dotprods::Error) -> ExitCode {
    eprintln!("dotprods: {e}");
    ExitCode::from(2)
}
