mod args;
mod commands;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cltdioph::dioph::PRECISION_ENV;

use crate::args::{Cli, Command};
use crate::commands::{dispatch, Context};
use crate::error::CliError;
use crate::output::{sha256_hex, RunConfig, Sink};

fn precision_from_env() -> Result<Option<u32>, CliError> {
    match std::env::var(PRECISION_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{PRECISION_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(b) if b >= 64 => Ok(Some(b)),
            _ => Err(CliError::Config(format!(
                "{PRECISION_ENV} must be an integer >= 64, got `{v}`"
            ))),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let precision_bits = precision_from_env()?;
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let input = match &cli.command {
        Command::Fit { input, .. } => Some(
            std::fs::read_to_string(input)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?,
        ),
        _ => None,
    };
    let config = RunConfig {
        command: &cli.command,
        common: &cli.common,
        precision_bits,
        input_sha256: input.as_deref().map(|s| sha256_hex(s.as_bytes())),
    };
    let sink = Sink::new(&config, cli.common.out.clone())?;
    let ctx = Context {
        common: &cli.common,
        precision_bits,
        input,
    };
    let body = dispatch(&cli.command, &ctx, &sink)?;
    let mut stdout = std::io::stdout().lock();
    write!(stdout, "{}{body}", sink.header_block())?;
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            eprintln!(
                "{}",
                CliError::Config(first.trim_start_matches("error: ").to_string()).one_line()
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
