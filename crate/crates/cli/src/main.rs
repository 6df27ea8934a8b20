mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    if !e.to_string().contains("Usage:") {
                        eprintln!("\n{}", Cli::command().render_usage());
                    }
                    ExitCode::from(1)
                }
            };
        }
    };
    let verbose = cli.verbose > 0;
    let result = match cli.command {
        Command::Score(a) => commands::score(a, verbose),
        Command::ScoreUnseen(a) => commands::score_unseen(a, verbose),
        Command::Oscore(a) => commands::oscore(a, verbose),
        Command::Eval(a) => commands::eval(a, verbose),
        Command::Rank(a) => commands::rank(a, verbose),
        Command::Stream(a) => commands::stream(a, verbose),
        Command::Gen(a) => commands::gen(a, verbose),
        Command::Bench(a) => commands::bench(a, verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
