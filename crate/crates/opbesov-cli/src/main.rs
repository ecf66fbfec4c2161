//! `opbesov`: fractional powers, Besov quasi-norms, K-functionals and the check suite from one
//! JSON config.
//!
//! Exit status: 0 on success, 1 when a check fails or a computation errors, 2 on a configuration
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_config, parse_suite, Command, ConfigError, Format, RunConfig, Suite};

#[derive(Debug, Parser)]
#[command(name = "opbesov", version, about = "Abstract Besov spaces of non-negative operators, numerically")]
struct Cli {
    /// JSON config file, or the JSON text itself.
    #[arg(long)]
    config: Option<String>,
    /// Seed for every random draw (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Check ids, comma-separated, or `all`; runs `verify` when no config is given.
    #[arg(long)]
    suite: Option<String>,
    /// Worker threads for the check suite.
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(src) => parse_config(src)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &cli.suite {
        parse_suite(&Suite::Text(s.clone()))?;
        cfg.suite = Some(Suite::Text(s.clone()));
        if cfg.command.is_none() {
            cfg.command = Some(Command::Verify);
        }
    }
    if cli.config.is_none() && cli.suite.is_none() {
        return Err(ConfigError::Invalid { key: "command", message: "nothing to do: pass --config or --suite".into() });
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = Some(f);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: key `jobs`: must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let plan = match load(&cli).and_then(|c| c.plan()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::execute(&plan) {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::ChecksFailed) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}: {e:#}", plan.command.name());
            ExitCode::from(1)
        }
    }
}
