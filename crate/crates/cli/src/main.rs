use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relqkd_core::acceptance;
use relqkd_core::config::SweepConfig;
use relqkd_core::sweep::{emit_outputs, run_sweep, workers_from_env, write_csv};
use relqkd_core::Error;

/// Key rates and homodyne statistics for a sender talking to a uniformly
/// accelerated receiver.
#[derive(Parser)]
#[command(name = "relqkd", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const AFTER_HELP: &str = "Worker threads: set RELQKD_WORKERS (defaults to the number of CPUs).
Exit codes: 0 success, 1 selftest failure, 2 config error, 3 numeric failure, 4 I/O error.";

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV, surface and manifest files.
    Sweep {
        config: PathBuf,
        /// `key=value` overrides applied on top of the file.
        overrides: Vec<String>,
    },
    /// Evaluate the grid given entirely by `key=value` pairs and print CSV.
    Point {
        #[arg(required = true)]
        assignments: Vec<String>,
    },
    /// Parse a config and report the grid it describes.
    Validate { config: PathBuf, overrides: Vec<String> },
    /// Run the built-in acceptance checks.
    Selftest,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn sweep(config: PathBuf, overrides: Vec<String>) -> Result<ExitCode, Error> {
    let cfg = SweepConfig::from_path(&config, &overrides)?;
    let workers = workers_from_env()?;
    let table = run_sweep(&cfg, workers)?;
    let written = emit_outputs(&table, &cfg)?;
    for p in &written {
        println!("{}", p.display());
    }
    let failed = table.failed();
    if failed > 0 {
        eprintln!(
            "error: {failed} of {} points failed to converge; see the status column",
            table.rows.len()
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn point(assignments: Vec<String>) -> Result<ExitCode, Error> {
    let cfg = SweepConfig::from_overrides(&assignments)?;
    let table = run_sweep(&cfg, workers_from_env()?)?;
    let stdout = std::io::stdout();
    let io = |source| Error::Io {
        path: "<stdout>".into(),
        source,
    };
    write_csv(&table.rows, stdout.lock()).map_err(io)?;
    for d in table.diagnostics.iter().filter_map(|d| d.error.as_ref()) {
        eprintln!("warning: {d}");
    }
    Ok(if table.failed() > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn validate(config: PathBuf, overrides: Vec<String>) -> Result<ExitCode, Error> {
    let cfg = SweepConfig::from_path(&config, &overrides)?;
    println!("{}: ok", config.display());
    println!("points: {}", cfg.points());
    println!(
        "axes: T {} x k_so {} x a {} x eta {} x beta_rec {}",
        cfg.t.len(),
        cfg.k_so.len(),
        cfg.a.len(),
        cfg.eta.len(),
        cfg.beta_rec.len()
    );
    println!("engine: {}", cfg.engine.kind.as_str());
    println!("output: {}", cfg.output.dir.join(&cfg.output.prefix).display());
    Ok(ExitCode::SUCCESS)
}

fn selftest() -> ExitCode {
    let mut out = std::io::stdout().lock();
    let mut all = true;
    for criterion in acceptance::CRITERIA {
        let report = criterion();
        all &= report.passed;
        let _ = write!(out, "{report}");
        let _ = out.flush();
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, overrides } => sweep(config, overrides),
        Command::Point { assignments } => point(assignments),
        Command::Validate { config, overrides } => validate(config, overrides),
        Command::Selftest => Ok(selftest()),
    };
    match result {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
