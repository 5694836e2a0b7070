//! Command-line front end: planted data generation, single runs, noise
//! sweeps, and exact oracles, with JSON and CSV reports.

pub mod args;
pub mod commands;
pub mod experiment;
pub mod report;

use std::fmt;

pub use args::Cli;
pub use commands::run;

/// A command line that parsed but asks for something impossible.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Exit status for a failed command: usage problems, data or domain
/// errors, and oracle budget refusals are told apart.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<tensorclus::Error>() {
            return match e {
                tensorclus::Error::BudgetExceeded { .. } => EXIT_BUDGET,
                tensorclus::Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}
