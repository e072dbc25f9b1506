//! `singtrace`: evaluate, verify and sweep trace formulae for δ and δ′
//! interactions on circles and spheres.
//!
//! Exit codes: 0 success, 1 verification gap above tolerance, 2 usage,
//! domain, plan or spectral-position errors, 3 mode sum not converged,
//! 4 numerical failure.

mod args;
mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, Format};
use output::{emit, Report};

fn run<A, R, Row>(
    command: &str,
    args: &A,
    format: Format,
    f: impl FnOnce(&A) -> singtrace_core::Result<Report<R, Row>>,
) -> i32
where
    A: Serialize,
    R: Serialize,
    Row: Serialize,
{
    match f(args) {
        Ok(report) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = emit(&mut out, command, args, format, &report).and_then(|_| out.flush())
            {
                eprintln!("error: failed to write output: {e}");
                return commands::EXIT_NUMERIC;
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            commands::exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Trace(a) => run("trace", a, a.format, commands::trace),
        Command::Verify(a) => run("verify", a, a.format, commands::verify),
        Command::Eigs(a) => run("eigs", a, a.format, commands::eigs),
        Command::Decay(a) => run("decay", a, a.format, commands::decay),
        Command::Sweep(a) => run("sweep", a, a.format, commands::sweep_cmd),
    };
    ExitCode::from(code as u8)
}
