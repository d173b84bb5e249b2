//! `subsim`: score sentence pairs, train thresholds, evaluate.
//!
//! Exit codes: 0 success, 1 I/O (including unreadable model files), 2 bad
//! data (empty or malformed inputs, out-of-vocabulary sentences, singular
//! Gram matrix), 3 degenerate training data, 4 failed self-test.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sim(args) => commands::sim(&args),
        Command::Score(args) => commands::score(&args),
        Command::Train(args) => commands::train(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Selftest(args) => commands::selftest(&args),
        Command::Synth(args) => commands::synth(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
