//! `medimax` command-line frontend.
//!
//! Exit codes: 0 success, 1 a verified claim failed, 2 usage or input error,
//! 3 internal invariant breach (including panics).

mod args;
mod commands;

use std::panic;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use args::{Cli, RunConfig};
use commands::{Breach, Outcome};

fn threads() -> Result<()> {
    let Ok(v) = std::env::var("MEDIMAX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("MEDIMAX_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    threads()?;
    let command = match (cli.config, cli.command) {
        (Some(_), Some(_)) => bail!(commands::Usage("--config replaces the subcommand; give one or the other".into())),
        (None, None) => bail!(commands::Usage("no subcommand given".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
                .command
        }
        (None, Some(c)) => c,
    };
    if let Some(path) = &cli.save_config {
        let cfg = RunConfig { command: command.clone() };
        commands::write_atomic(path, &(serde_json::to_string_pretty(&cfg)? + "\n"))?;
    }
    commands::execute(&command)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(Outcome::Success)) => ExitCode::SUCCESS,
        Ok(Ok(Outcome::Failed)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Breach>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
        Err(_) => ExitCode::from(3),
    }
}
