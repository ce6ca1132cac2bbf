use std::process::ExitCode;

use carnot_cli::args::Cli;
use carnot_cli::{error_kind, error_payload, execute, exit_code};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            println!("{}", error_payload(None, "usage", e.to_string().trim(), 2));
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    match execute(&cli.command) {
        Ok(report) => {
            print!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("carnot {name}: {e}");
            println!("{}", error_payload(Some(name), error_kind(&e), &e.to_string(), code));
            ExitCode::from(code)
        }
    }
}
