use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use patmat_cli::{error_code, outcome_code, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.body.as_bytes());
            ExitCode::from(outcome_code(out.outcome) as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}
