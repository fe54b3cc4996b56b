//! bioq: experiment runner for the membrane device simulators.
//!
//! `bioq run --config <file>` executes one experiment family (field solver,
//! dispersion sweep, winding register, spin cluster, or placement anneal)
//! and writes CSV data plus a reproduction manifest into the output
//! directory. `bioq validate --config <file>` reports schema and sanity
//! violations without running anything.
//!
//! Exit codes: 0 success, 2 config-error, 3 numerics-error, 1 anything
//! else. Errors print to stderr as `bioq: <category>: <message>`.

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use output::OutputDir;

#[derive(Parser)]
#[command(name = "bioq", version, about = "Membrane device experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured experiment and write its artifacts.
    Run(RunArgs),
    /// Report config violations without executing; always exits 0.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config field by dotted path, e.g. --set fdtd.steps=2000.
    /// Repeatable; numeric segments index arrays.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Override the run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Check the config and exit without running.
    #[arg(long)]
    validate_only: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("bioq: {e}");
                e.exit_code()
            }
        },
        Command::Validate(args) => validate(&args),
    };
    std::process::exit(code);
}

fn load(args: &CommonArgs) -> Result<config::LoadedConfig, CliError> {
    config::load(&args.config, &args.set, args.seed, args.out.as_deref())
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let loaded = load(&args.common)?;
    let violations = config::check(&loaded.config);
    if !violations.is_empty() {
        let joined = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::config(joined));
    }
    if args.validate_only {
        println!("ok");
        return Ok(());
    }

    let cfg = &loaded.config;
    let started = Instant::now();
    let out = OutputDir::create(&cfg.output_dir)?;
    let result = experiments::run_experiment(cfg, &out)?;
    if cfg.emit.json {
        out.write_json("results.json", &result.summary)?;
    }
    let manifest = output::manifest(cfg, &result.outputs, &result.summary, started.elapsed())?;
    out.write_json("manifest.json", &manifest)?;

    for record in &result.outputs {
        println!("wrote {}", out.path().join(&record.file).display());
    }
    println!("wrote {}", out.path().join("manifest.json").display());
    Ok(())
}

fn validate(args: &CommonArgs) -> i32 {
    match load(args) {
        Err(e @ CliError::Other(_)) => {
            // can't even read the file: not a config verdict
            eprintln!("bioq: {e}");
            e.exit_code()
        }
        Err(e) => {
            println!("violation: {}", e.message());
            0
        }
        Ok(loaded) => {
            let violations = config::check(&loaded.config);
            if violations.is_empty() {
                println!("ok");
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
            }
            0
        }
    }
}
