mod args;
mod commands;
mod config;
mod error;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use error::{CliError, CliResult};
use run::{sha256_hex, Run};

#[derive(Serialize)]
struct EffectiveConfig<'a, T: Serialize> {
    command: &'a str,
    seed: Option<u64>,
    args: &'a T,
}

fn digest<T: Serialize>(command: &str, seed: Option<u64>, args: &T) -> String {
    let cfg = EffectiveConfig { command, seed, args };
    sha256_hex(serde_json::to_string(&cfg).expect("args serialize").as_bytes())
}

fn execute(argv: Vec<String>) -> CliResult<()> {
    let merged = match config::config_path(&argv) {
        Some(p) => {
            let path = std::path::PathBuf::from(p);
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            config::merge_config(&argv, &config::parse_config(&text, &path)?)?
        }
        None => argv.clone(),
    };
    let cli = Cli::try_parse_from(&merged).unwrap_or_else(|e| e.exit());

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }

    let command_line = std::iter::once("moblag".to_string())
        .chain(argv.iter().skip(1).cloned())
        .collect::<Vec<_>>()
        .join(" ");
    let mut run = Run::new(&cli.out_dir)?;
    let name = cli.command.name();
    let (config_digest, rng_seed) = match &cli.command {
        Command::Connectivity(a) => {
            commands::connectivity(&mut run, a)?;
            (digest(name, None, a), None)
        }
        Command::Regress(a) => {
            commands::regress(&mut run, a)?;
            (digest(name, None, a), None)
        }
        Command::Sweep(a) => {
            commands::sweep(&mut run, a)?;
            (digest(name, None, a), None)
        }
        Command::Leadlag(a) => {
            commands::leadlag(&mut run, a)?;
            (digest(name, None, a), None)
        }
        Command::Network(a) => {
            let seed = cli.seed.unwrap_or(0);
            commands::network(&mut run, a, seed)?;
            (digest(name, Some(seed), a), Some(seed))
        }
        Command::Synth(a) => {
            let cfg = commands::synth(&mut run, a, cli.seed)?;
            (digest(name, Some(cfg.rng_seed), &cfg), Some(cfg.rng_seed))
        }
        Command::Report(a) => {
            report::report(&mut run, a)?;
            (digest(name, None, a), None)
        }
    };
    run.finish(command_line, name, config_digest, rng_seed)
}

fn main() -> ExitCode {
    match execute(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
