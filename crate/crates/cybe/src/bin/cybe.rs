//! Thin command-line front end; all logic lives in the library.

use std::process::ExitCode;

use cybe::cli;

const USAGE: &str = "usage: cybe <check | normalize | build-w | twist-check | trace-ext | gauge> \
--manifest PATH [--window N] [--json-out PATH]";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let invocation = match cli::parse_args(&args) {
        Ok(inv) => inv,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("{USAGE}");
            return ExitCode::from(cli::EXIT_INPUT as u8);
        }
    };
    let manifest_text = match std::fs::read_to_string(&invocation.manifest_path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", invocation.manifest_path);
            return ExitCode::from(cli::EXIT_INPUT as u8);
        }
    };
    let outcome = cli::execute(&invocation, &manifest_text);
    let rendered = cli::render(&outcome.report);
    println!("{rendered}");
    if let Some(path) = &invocation.json_out {
        if let Err(err) = std::fs::write(path, format!("{rendered}\n")) {
            eprintln!("error: cannot write {path}: {err}");
            return ExitCode::from(cli::EXIT_INPUT as u8);
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
