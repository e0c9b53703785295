use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use mazebot::cli::{self, Cli, CliError};

fn main() -> ExitCode {
    // help and version go through clap untouched
    if let Err(e) = Cli::try_parse() {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    }
    match cli::run(std::env::args_os()) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            eprintln!("elapsed {:.3}s", out.duration.as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(err) => {
            let line = match &err {
                CliError::Usage(msg) => msg.lines().next().unwrap_or("usage error").to_string(),
                other => other.to_string(),
            };
            eprintln!("error: {}", line.trim_start_matches("error: "));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
