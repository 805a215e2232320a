//! `lapcompress` command-line tool.

mod cli;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lapcompress::Execution;

use cli::{Cli, Command};

fn single_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let args = match config::apply(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", single_line(&e));
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", single_line(first));
            return ExitCode::from(2);
        }
    };

    let exec = match cli.threads {
        Some(1) => Execution::Sequential,
        Some(n) => {
            lapcompress::par::configure_threads(n as usize);
            Execution::Parallel
        }
        None => Execution::default(),
    };
    let result = match &cli.command {
        Command::GenGraph(a) => commands::gen_graph(a),
        Command::Simulate(a) => commands::simulate(a, exec),
        Command::Compress(a) => commands::compress(a, exec),
        Command::Stats(a) => commands::stats(a),
        Command::SynthField(a) => commands::synth_field(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", single_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
