pub mod args;
pub mod cert;
pub mod commands;
pub mod source;

pub use args::Cli;
pub use commands::{run, Outcome, Output};

/// Exit code for an error raised while running a command.
pub fn error_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<patmat::Error>() {
        Some(patmat::Error::Degenerate(_)) => 2,
        _ => 1,
    }
}

pub fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Ok => 0,
        Outcome::Vacuous => 2,
        Outcome::Failed => 1,
    }
}
