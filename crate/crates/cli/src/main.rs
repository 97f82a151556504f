//! `raacsim` command-line driver.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration or dataset, 4 I/O,
//! 5 simulation or fit failure, 6 self-test failure.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use raacsim_core::config::RunConfig;
use raacsim_core::output::{self, write_json};
use raacsim_core::{
    fit_exponent, load_config, load_dataset, run_selftest, run_simulation, run_sweep, DatasetError,
};

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_MODEL: u8 = 5;
const EXIT_SELFTEST: u8 = 6;

const TAMPER_ENV: &str = "RAACSIM_SELFTEST_TAMPER";

#[derive(Parser)]
#[command(
    name = "raacsim",
    version,
    about = "Corrosion-induced cracking and concealment time of reinforced concrete"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one corrosion history and write series.csv and summary.json
    Simulate(Common),
    /// Run the configured grid and write safety_map.csv and safety_map.json
    Sweep(Common),
    /// Fit the diffusivity exponent m to a dataset and write calibration.json
    Calibrate(Common),
    /// Validate the configuration, print the parameter ledger and run the self-test battery
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a configuration value, e.g. `concrete.porosity=0.6`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Sweep worker threads (defaults to the available parallelism)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// More log output; repeat for debug detail
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (Command::Simulate(common)
    | Command::Sweep(common)
    | Command::Calibrate(common)
    | Command::Check(common)) = &cli.command;
    let level = match common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();

    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Sweep(c) => sweep(c),
        Command::Calibrate(c) => calibrate(c),
        Command::Check(c) => check(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("raacsim: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn config(common: &Common) -> Result<RunConfig, Failure> {
    load_config(&common.config, &common.overrides).map_err(|e| {
        let code = match e {
            raacsim_core::ConfigError::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e)
    })
}

fn out_dir(common: &Common) -> Result<&Path, Failure> {
    let dir = common
        .out
        .as_deref()
        .ok_or_else(|| Failure::new(EXIT_USAGE, "--out <dir> is required for this subcommand"))?;
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf), Failure> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    Ok((BufWriter::new(file), path))
}

fn io_failure(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))
}

fn workers(common: &Common) -> usize {
    common
        .workers
        .map(|w| w as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn simulate(common: &Common) -> Outcome {
    let cfg = config(common)?;
    let dir = out_dir(common)?;
    let (outcome, failure) = match run_simulation(&cfg.params, &cfg.solver) {
        Ok(o) => (o, None),
        Err(e) => {
            let message = e.to_string();
            (e.into_outcome(), Some(message))
        }
    };
    let (w, path) = create(dir, output::SERIES_FILE)?;
    output::write_series(w, &outcome, &cfg).map_err(io_failure(&path))?;
    let (w, path) = create(dir, output::SUMMARY_FILE)?;
    write_json(w, &output::summary(&outcome, &cfg)).map_err(io_failure(&path))?;
    if let Some(message) = failure {
        return Err(Failure::new(EXIT_MODEL, message));
    }
    match (outcome.t_crit, outcome.t_crit_time) {
        (Some(t), Some(time)) => println!(
            "t_crit = {} um, T_crit = {} years",
            t * 1e6,
            time / raacsim_core::units::SECONDS_PER_YEAR
        ),
        _ => println!(
            "horizon exhausted at t_cor = {} um without reaching the criterion",
            cfg.solver.t_cor_max * 1e6
        ),
    }
    Ok(())
}

fn sweep(common: &Common) -> Outcome {
    let cfg = config(common)?;
    let grid = cfg
        .sweep
        .clone()
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "configuration has no sweep.axes"))?;
    let dir = out_dir(common)?;
    let n = workers(common);
    info!("sweeping {} cells on {n} workers", grid.cells().len());
    let result =
        run_sweep(&grid, &cfg.params, &cfg.solver, n).map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    let (w, path) = create(dir, output::SAFETY_MAP_FILE)?;
    output::write_safety_map(w, &result, &cfg).map_err(io_failure(&path))?;
    let (w, path) = create(dir, output::SAFETY_SUMMARY_FILE)?;
    write_json(w, &output::sweep_summary(&result, &cfg)).map_err(io_failure(&path))?;
    let failures = result.failures();
    if failures > 0 {
        eprintln!(
            "raacsim: warning: {failures} of {} cells failed",
            result.cells.len()
        );
    }
    println!("{} cells written to {}", result.cells.len(), dir.display());
    Ok(())
}

fn calibrate(common: &Common) -> Outcome {
    let cfg = config(common)?;
    let path = cfg
        .calibration
        .dataset
        .clone()
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "configuration has no calibration.dataset"))?;
    let dir = out_dir(common)?;
    let records = load_dataset(&path).map_err(|e| match e {
        DatasetError::Io { .. } => Failure::new(EXIT_IO, e),
        _ => Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())),
    })?;
    info!("fitting m to {} records", records.len());
    let result = fit_exponent(&records, &cfg.params, &cfg.solver, &cfg.calibration.options)
        .map_err(|e| Failure::new(EXIT_MODEL, e))?;
    for r in result.residuals.iter().filter(|r| r.censored) {
        warn!(
            "record {} did not reach the criterion within the horizon",
            r.index + 1
        );
    }
    let (w, out) = create(dir, output::CALIBRATION_FILE)?;
    write_json(
        w,
        &output::calibration_summary(&result, &cfg, records.len()),
    )
    .map_err(io_failure(&out))?;
    match result.rate_multiplier {
        Some(k) => println!("m = {}\nrate_multiplier = {k}", result.m),
        None => println!("m = {}", result.m),
    }
    Ok(())
}

fn check(common: &Common) -> Outcome {
    let cfg = config(common)?;
    for line in cfg.ledger_lines() {
        println!("{line}");
    }
    let tamper = std::env::var(TAMPER_ENV).is_ok_and(|v| v == "1");
    let results = run_selftest(&cfg.params, tamper);
    let mut failed = Vec::new();
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        if !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_SELFTEST,
            format!("self-test failed: {}", failed.join(", ")),
        ))
    }
}
