//! `kg` — config-driven runner for the Klein-Gordon spectral toolkit.
//!
//! Subcommands: `verify` (run the check suites from a JSON config),
//! `evolve` (advance a snapshot, logging observables per step) and
//! `spectrum` (dump per-mode data as CSV).
//!
//! Exit codes are a stable scripting contract: 0 success, 1 physics/check
//! failure (failed suite, violated stability bound), 2 usage or I/O error.
//! `KG_THREADS` caps the internal thread pool.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kg_core::{
    evolve_exact, evolve_leapfrog, export, snapshot, verify, KgError, LatticeField,
};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kg",
    version,
    about = "Spectral toolkit for real Klein-Gordon fields",
    after_help = "Exit codes: 0 = success, 1 = check/physics failure, 2 = usage or I/O error.\n\
                  KG_THREADS limits internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Integrator {
    /// Exact spectral phase rotation.
    Exact,
    /// Symplectic kick-drift-kick integrator.
    Leapfrog,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a JSON config and write a report.
    Verify {
        /// JSON config (seed, grid, mass, suites, tolerances). Omit for the
        /// default configuration (1D, 256 points, m = 1, all suites).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a snapshot and append per-step observables to a CSV.
    Evolve {
        /// Input snapshot (KGF1 format).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        integrator: Integrator,
        /// Step size.
        #[arg(long)]
        dt: f64,
        /// Number of steps; 0 copies the snapshot through unchanged.
        #[arg(long)]
        steps: usize,
        /// Output snapshot path.
        #[arg(long = "out")]
        output: PathBuf,
        /// Observables CSV (appended; created with a header if absent).
        #[arg(long)]
        observables: Option<PathBuf>,
    },
    /// Dump the positive-frequency spectrum of a snapshot as CSV.
    Spectrum {
        /// Input snapshot (KGF1 format).
        #[arg(long = "in")]
        input: PathBuf,
        /// Output CSV path.
        #[arg(long = "csv")]
        csv: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Stability violations are physics failures (1); everything else that
/// errors out is a usage/I-O problem (2).
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<KgError>() {
        Some(KgError::LeapfrogUnstable { .. }) => 1,
        _ => 2,
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Verify { config, out } => cmd_verify(config.as_deref(), out.as_deref()),
        Command::Evolve {
            input,
            integrator,
            dt,
            steps,
            output,
            observables,
        } => cmd_evolve(&input, integrator, dt, steps, &output, observables.as_deref()),
        Command::Spectrum { input, csv } => cmd_spectrum(&input, &csv),
    }
}

fn cmd_verify(config: Option<&Path>, out: Option<&Path>) -> Result<ExitCode> {
    let cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            verify::SuiteConfig::from_json(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => verify::SuiteConfig::default(),
    };
    let report = verify::run_suite(&cfg)?;
    if let Some(path) = out {
        fs::write(path, report.to_json())
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    print!("{}", report.to_table());
    Ok(if report.aggregate_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_evolve(
    input: &Path,
    integrator: Integrator,
    dt: f64,
    steps: usize,
    output: &Path,
    observables: Option<&Path>,
) -> Result<ExitCode> {
    let field = snapshot::read_lattice_file(input)
        .with_context(|| format!("reading snapshot {}", input.display()))?;

    let mut log = ObservableLog::open(observables)?;
    log.record(&field)?;

    let final_field = if steps == 0 {
        // bit-for-bit copy-through
        field.clone()
    } else {
        match integrator {
            Integrator::Exact => {
                let mut s = field.to_spectrum();
                let mut latest = field.clone();
                for _ in 0..steps {
                    s = evolve_exact(&s, dt);
                    latest = s.to_lattice()?;
                    log.record(&latest)?;
                }
                latest
            }
            Integrator::Leapfrog => {
                let mut f = field.clone();
                for _ in 0..steps {
                    f = evolve_leapfrog(&f, dt, 1)?;
                    log.record(&f)?;
                }
                f
            }
        }
    };
    snapshot::write_lattice_file(output, &final_field)
        .with_context(|| format!("writing snapshot {}", output.display()))?;
    log.flush()?;
    println!(
        "evolved {} steps of dt = {dt} with the {} integrator, final time {}",
        steps,
        match integrator {
            Integrator::Exact => "exact",
            Integrator::Leapfrog => "leapfrog",
        },
        final_field.time()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(input: &Path, csv: &Path) -> Result<ExitCode> {
    let field = snapshot::read_lattice_file(input)
        .with_context(|| format!("reading snapshot {}", input.display()))?;
    let spectrum = field.to_spectrum();
    let text = export::spectrum_csv(&spectrum)?;
    fs::write(csv, text).with_context(|| format!("writing csv {}", csv.display()))?;
    let total = kg_core::norm_spectrum(&spectrum, 1.0)?;
    println!("total_norm_b1 = {total:.17e}");
    Ok(ExitCode::SUCCESS)
}

/// Appending CSV writer for per-step observables; writes the header only
/// when starting a fresh file.
struct ObservableLog {
    file: Option<fs::File>,
}

impl ObservableLog {
    fn open(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => None,
            Some(p) => {
                let fresh = fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
                let mut f = fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .with_context(|| format!("opening observables {}", p.display()))?;
                if fresh {
                    f.write_all(export::observables_header().as_bytes())?;
                }
                Some(f)
            }
        };
        Ok(Self { file })
    }

    fn record(&mut self, field: &LatticeField) -> Result<()> {
        if let Some(f) = &mut self.file {
            f.write_all(export::observables_row(field)?.as_bytes())?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if let Some(f) = &mut self.file {
            f.flush()?;
        }
        Ok(())
    }
}
