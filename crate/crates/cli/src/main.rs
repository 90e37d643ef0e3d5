//! `sysid`: generate datasets, identify sparse models and replay them.

mod args;
mod commands;
mod failure;
mod input;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a, json),
        Command::Degree(a) => commands::degree(a, json),
        Command::Identify(a) => commands::identify(a, json),
        Command::Predict(a) => commands::predict(a, json),
        Command::IdentifyOde(a) => commands::identify_ode(a, json),
        Command::Simulate(a) => commands::simulate(a, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
