//! `obsim`: run order-book experiments, list the built-in presets, and
//! analyze recorded price paths.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for failures
//! while running.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use obsim_core::runner::{self, Measure, Overrides, RunManifest, RunOptions};
use obsim_core::{ConfigError, RunError};

#[derive(Parser)]
#[command(name = "obsim", version, about = "Stochastic order-book simulation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML file or a preset name.
    Simulate {
        /// Path to an experiment document, or a preset name.
        source: String,
        /// Replaces the document's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Divide run lengths and burn-in by this factor.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        scale: u64,
        /// Output directory (default: the document's `output`, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for replicas and estimators.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
    },
    /// List the built-in presets.
    Presets,
    /// Apply estimators to a recorded `t,x` price path.
    Analyze {
        path: PathBuf,
        /// Estimator, optionally with parameters: `name` or
        /// `name:key=value,...` (e.g. `hurst_normalized:lags=[1,10,100]`).
        #[arg(long = "measure", required = true, num_args = 1..)]
        measures: Vec<String>,
        /// `t,price,return` trade list; otherwise price changes are used.
        #[arg(long)]
        trades: Option<PathBuf>,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
    },
    /// Check the files of an output directory against its manifest.
    Verify { dir: PathBuf },
}

/// Prints a line to stdout; a closed pipe (`obsim presets | head`) ends the
/// process quietly instead of panicking.
fn say(line: std::fmt::Arguments) {
    if let Err(e) = writeln!(io::stdout().lock(), "{line}") {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(3);
    }
}

fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => 2,
        _ => 3,
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    let mut src = std::error::Error::source(&e);
    while let Some(s) = src {
        eprintln!("  caused by: {s}");
        src = s.source();
    }
    ExitCode::from(exit_code(&e))
}

fn simulate(source: &str, seed: Option<u64>, scale: u64, out: Option<PathBuf>, threads: Option<u64>) -> Result<(), RunError> {
    let overrides = Overrides { seed };
    let config = if Path::new(source).is_file() {
        runner::load_config(source, overrides)?
    } else {
        match runner::preset(source) {
            Ok(p) => p.config(overrides)?,
            Err(e) => {
                return Err(ConfigError::invariant("source", format!("no such file, and {e}")).into());
            }
        }
    };
    let out_dir = out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| Path::new("out").join(&config.name));
    let options = RunOptions {
        out_dir: out_dir.clone(),
        scale,
        threads: threads.map(|t| t as usize),
    };
    let manifest = runner::run_experiment(&config, &options)?;
    say(format_args!(
        "{}: {} files in {} ({:.1} s)",
        manifest.name,
        manifest.files.len(),
        out_dir.display(),
        manifest.wall_clock_seconds
    ));
    Ok(())
}

fn analyze(path: &Path, specs: &[String], trades: Option<&Path>, out: &Path) -> Result<(), RunError> {
    let measures = specs
        .iter()
        .map(|s| Measure::parse_spec(s))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let manifest = runner::analyze(path, trades, &measures, out)?;
    for f in &manifest.files {
        say(format_args!("{}", out.join(&f.path).display()));
    }
    Ok(())
}

fn verify(dir: &Path) -> Result<(), RunError> {
    let manifest = RunManifest::read(dir)?;
    let bad = manifest.mismatches(dir);
    if bad.is_empty() {
        say(format_args!("{} files verified", manifest.files.len()));
        Ok(())
    } else {
        Err(RunError::Input {
            path: dir.display().to_string(),
            message: format!("digest mismatch: {}", bad.join(", ")),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            source,
            seed,
            scale,
            out,
            threads,
        } => simulate(&source, seed, scale, out, threads),
        Command::Presets => {
            for p in runner::list_presets() {
                let tag = if p.is_slow() { " [slow]" } else { "" };
                say(format_args!("{:<38} {}{}", p.name, p.description(), tag));
            }
            Ok(())
        }
        Command::Analyze {
            path,
            measures,
            trades,
            out,
        } => analyze(&path, &measures, trades.as_deref(), &out),
        Command::Verify { dir } => verify(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
