//! `hypocalc`: configuration-driven front end to the hypocalc toolkit.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
//! arguments, 3 numerically inconclusive result.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use commands::{Failure, Outcome};

#[derive(Parser)]
#[command(name = "hypocalc", version, about = "Filtrations, osculating algebras, cones, symbols, spectra and BCH checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration (a `.json` extension selects JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for `<command>.json` and CSV side tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format written to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Print nothing to stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Bracket words, Hörmander check and fiber dimensions per point.
    Filtration,
    /// Structure constants of the osculating algebras.
    Osculating,
    /// Cone sample, relation residuals, membership and invariance.
    Cone,
    /// Weighted orders, principal parts, characters and realized symbols.
    Symbol,
    /// Spectra, injectivity verdicts and hypoellipticity sweeps.
    Rockland,
    /// BCH order fits and properties of the interpolating map.
    Bch,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Filtration => "filtration",
            Command::Osculating => "osculating",
            Command::Cone => "cone",
            Command::Symbol => "symbol",
            Command::Rockland => "rockland",
            Command::Bch => "bch",
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HYPOCALC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("HYPOCALC_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("HYPOCALC_THREADS must be a positive integer, got `0`".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn report(command: Command, digest: String, seed: u64, outcome: &Outcome) -> Value {
    json!({
        "command": command.name(),
        "config_digest": digest,
        "seed": seed,
        "tool": { "name": "hypocalc", "version": env!("CARGO_PKG_VERSION") },
        "inconclusive": outcome.inconclusive,
        "results": outcome.results,
    })
}

fn write_outputs(dir: &PathBuf, command: Command, json_text: &str, outcome: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.json", command.name())), json_text)?;
    for (stem, body) in &outcome.tables {
        std::fs::write(dir.join(format!("{}_{stem}.csv", command.name())), body)?;
    }
    Ok(())
}

fn run(cli: Cli) -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let Some(path) = &cli.config else {
        eprintln!("error: missing required flag --config");
        return ExitCode::from(2);
    };
    let loaded = match config::load(path) {
        Ok(l) => l,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let cfg = &loaded.config;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let result = match cli.command {
        Command::Filtration => commands::filtration(cfg),
        Command::Osculating => commands::osculating_cmd(cfg),
        Command::Cone => commands::cone(cfg, seed),
        Command::Symbol => commands::symbol(cfg, seed),
        Command::Rockland => commands::rockland(cfg),
        Command::Bch => commands::bch(cfg, seed),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Config(e)) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let value = report(cli.command, digest(&loaded.bytes), seed, &outcome);
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    if let Some(dir) = &cli.out {
        if let Err(e) = write_outputs(dir, cli.command, &text, &outcome) {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if !cli.quiet {
        let body = match cli.format {
            Format::Json => text,
            Format::Csv => outcome.tables.first().map(|t| t.1.clone()).unwrap_or_default(),
        };
        let mut out = std::io::stdout().lock();
        if out.write_all(body.as_bytes()).and_then(|_| out.flush()).is_err() {
            return ExitCode::from(1);
        }
    }
    if outcome.inconclusive {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(cli)
}
