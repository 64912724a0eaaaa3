use std::process::ExitCode;

use clap::Parser;
use fate_cli::{export::stderr_line, run, Cli, CliError, Status};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            stderr_line(&CliError::new("UsageError", e.to_string().trim_end()).to_json());
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial(message)) => {
            stderr_line(&CliError::new("PartialFailure", message).to_json());
            ExitCode::from(2)
        }
        Err(e) => {
            stderr_line(&e.to_json());
            ExitCode::from(1)
        }
    }
}
