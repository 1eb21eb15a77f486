//! `icl-lab`: seeded experiment runs, config validation, and the theory
//! property checks.
//!
//! Exit codes: 0 success, 2 config validation failure, 3 property violation
//! (a theory or oracle check found a counterexample).

mod config;
mod experiments;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::{validate, ExperimentConfig};

#[derive(Parser)]
#[command(name = "icl-lab", version, about = "Numerical laboratory for in-context learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write results.csv + config.echo.json.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write plot.svg with the primary metric.
        #[arg(long)]
        plot: bool,
        /// Worker threads (default: all cores). Results are identical for
        /// any value.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config against the schema and cross-field rules.
    Validate { config: PathBuf },
    /// Run the theory property suite and print a JSON report.
    TheoryCheck {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1_700_000_000)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_PROPERTY_VIOLATION: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            plot,
            threads,
        } => match cmd_run(&config, out.as_deref(), plot, threads) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::Validate { config } => match cmd_validate(&config) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::TheoryCheck {
            trials,
            seed,
            threads,
        } => match cmd_theory_check(trials, seed, threads) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
    }
}

fn load_config(path: &Path) -> anyhow::Result<Result<ExperimentConfig, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    match serde_json::from_str::<ExperimentConfig>(&text) {
        Ok(c) => Ok(Ok(c)),
        Err(e) => Ok(Err(format!("{e}"))),
    }
}

fn install_pool(threads: Option<usize>) -> anyhow::Result<Option<rayon::ThreadPool>> {
    match threads {
        Some(n) => Ok(Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building thread pool")?,
        )),
        None => Ok(None),
    }
}

fn cmd_run(
    path: &Path,
    out_override: Option<&Path>,
    plot: bool,
    threads: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let config = match load_config(path)? {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config schema error: {msg}");
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    let report = validate(&config);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.is_clean() {
        for e in &report.errors {
            eprintln!("invalid config: {e}");
        }
        return Ok(ExitCode::from(EXIT_VALIDATION));
    }

    let out_dir: PathBuf = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("icl-lab-out/{}", config.name())));

    let pool = install_pool(threads)?;
    let outcome = match &pool {
        Some(p) => p.install(|| experiments::run(&config)),
        None => experiments::run(&config),
    }?;

    let mut table = outcome.table;
    table.insert_metadata("experiment", config.name());
    table.insert_metadata("content_hash", output::config_hash(&config)?);

    output::write_atomic(&out_dir, "results.csv", table.to_csv().as_bytes())?;
    output::write_atomic(
        &out_dir,
        "config.echo.json",
        output::echo_json(&config)?.as_bytes(),
    )?;
    if plot {
        match plot::render(config.name(), &table) {
            Some(svg) => {
                output::write_atomic(&out_dir, "plot.svg", svg.as_bytes())?;
            }
            None => eprintln!("note: no chart defined for {}", config.name()),
        }
    }
    println!(
        "{}: wrote {}",
        config.name(),
        out_dir.join("results.csv").display()
    );
    if outcome.property_violations > 0 {
        eprintln!(
            "property violations detected: {}",
            outcome.property_violations
        );
        return Ok(ExitCode::from(EXIT_PROPERTY_VIOLATION));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(path: &Path) -> anyhow::Result<ExitCode> {
    let config = match load_config(path)? {
        Ok(c) => c,
        Err(msg) => {
            println!("schema error: {msg}");
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    let report = validate(&config);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    if report.is_clean() {
        println!("ok: {} config is valid", config.name());
        Ok(ExitCode::SUCCESS)
    } else {
        for e in &report.errors {
            println!("error: {e}");
        }
        Ok(ExitCode::from(EXIT_VALIDATION))
    }
}

fn cmd_theory_check(trials: usize, seed: u64, threads: Option<usize>) -> anyhow::Result<ExitCode> {
    let pool = install_pool(threads)?;
    let report = match &pool {
        Some(p) => p.install(|| theory_verify::run_theory_check(trials, seed)),
        None => theory_verify::run_theory_check(trials, seed),
    }?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if report.theorem1.violations > 0 {
        return Ok(ExitCode::from(EXIT_PROPERTY_VIOLATION));
    }
    Ok(ExitCode::SUCCESS)
}
