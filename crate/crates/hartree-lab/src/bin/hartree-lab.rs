//! Command-line front end: simulate, verify, sweep, morawetz, report.
//!
//! Exit codes: 0 success, 1 validation failure (bad config, bad usage,
//! malformed inputs), 2 numerical or runtime abort, 3 failed self-checks.
//! Every data-producing run writes a manifest recording all inputs and the
//! seed; identical manifests give identical CSVs. Thread count for sweeps
//! follows RAYON_NUM_THREADS.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use toml::value::{Table, Value};

use hartree_lab::config::{load_config, RunConfig};
use hartree_lab::dynamics::{evolve, Probe};
use hartree_lab::error::{LabError, Result};
use hartree_lab::functionals::morawetz_lhs;
use hartree_lab::experiments::sweep_almost_conservation;
use hartree_lab::io::{
    read_csv, write_manifest, write_series_csv, write_snapshot, write_sweep_csv,
};
use hartree_lab::verify::run_verification;

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hartree-lab",
    version,
    about = "pseudospectral diagnostics for the periodic Hartree flow"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the configured data and write the diagnostics series
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// output directory (series.csv, final.snap, manifest.toml)
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the exact-identity self-checks and print a pass/fail table
    Verify,
    /// Rescaled almost-conservation sweep over the configured thresholds
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Interaction functional along the flow
    Morawetz {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Merge wide CSV outputs into one plot-ready long-format table
    Report {
        /// CSV files produced by simulate, sweep or morawetz
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Simulate { config, out } => with_config(&config, |cfg| simulate(cfg, &out)),
        Cmd::Verify => verify(),
        Cmd::Sweep { config, out } => with_config(&config, |cfg| sweep(cfg, &out)),
        Cmd::Morawetz { config, out } => with_config(&config, |cfg| morawetz(cfg, &out)),
        Cmd::Report { inputs, out } => report(&inputs, &out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Validation-shaped errors exit 1; aborted runs (numerics, io) exit 2.
fn classify(e: &LabError) -> u8 {
    match e {
        LabError::NumericalAbort { .. } | LabError::Io(_) => EXIT_ABORT,
        _ => EXIT_INVALID,
    }
}

fn with_config(path: &Path, run: impl FnOnce(RunConfig) -> Result<u8>) -> Result<u8> {
    match load_config(path) {
        Ok(cfg) => run(cfg),
        Err(violations) => {
            eprintln!("{}: {} problem(s)", path.display(), violations.len());
            for v in &violations {
                eprintln!("  - {v}");
            }
            Ok(EXIT_INVALID)
        }
    }
}

fn run_manifest(cfg: &RunConfig, command: &str) -> Table {
    let mut table = cfg.manifest();
    let mut run = Table::new();
    run.insert("command".into(), Value::String(command.into()));
    run.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    table.insert("run".into(), Value::Table(run));
    table
}

fn simulate(cfg: RunConfig, out: &Path) -> Result<u8> {
    std::fs::create_dir_all(out)?;
    let grid = cfg.grid()?;
    let mp = cfg.model()?;
    let u0 = cfg.initial_field(&grid)?;
    let probes = cfg.probe_list()?;
    let outcome = evolve(&u0, &mp, &cfg.evolve_config(), &probes)?;

    write_series_csv(&out.join("series.csv"), &outcome.series)?;
    write_snapshot(&out.join("final.snap"), &outcome.final_state)?;
    for (i, (_, field)) in outcome.snapshots.iter().enumerate() {
        write_snapshot(&out.join(format!("snap_{i:05}.snap")), field)?;
    }
    write_manifest(&out.join("manifest.toml"), &run_manifest(&cfg, "simulate"))?;

    let samples = outcome.series.rows().len() / cfg.probes.len().max(1);
    println!(
        "simulate: {} probe(s) sampled {} time(s) over t = [0, {}], wrote {}",
        cfg.probes.len(),
        samples,
        cfg.t_final,
        out.join("series.csv").display()
    );
    Ok(EXIT_OK)
}

fn verify() -> Result<u8> {
    let report = run_verification()?;
    print!("{}", report.render());
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFY })
}

fn sweep(cfg: RunConfig, out: &Path) -> Result<u8> {
    std::fs::create_dir_all(out)?;
    let spec = cfg.sweep_spec()?;
    let result = sweep_almost_conservation(&spec)?;
    write_sweep_csv(&out.join("sweep.csv"), &result)?;
    write_manifest(&out.join("manifest.toml"), &run_manifest(&cfg, "sweep"))?;

    let valid = result.rows.iter().filter(|r| r.valid).count();
    println!("sweep: {} row(s), {valid} valid, wrote {}", result.rows.len(), out.join("sweep.csv").display());
    match result.increment_slope {
        Some(sl) => println!("  log2 increment slope vs threshold: {sl:.4}"),
        None => println!("  increment slope: not fitted (needs >= 3 valid rough rows)"),
    }
    match result.commutator_slope {
        Some(sl) => println!("  log2 commutator slope vs threshold: {sl:.4}"),
        None => println!("  commutator slope: not fitted (needs >= 3 valid rough rows)"),
    }
    Ok(EXIT_OK)
}

fn morawetz(cfg: RunConfig, out: &Path) -> Result<u8> {
    std::fs::create_dir_all(out)?;
    let grid = cfg.grid()?;
    let mp = cfg.model()?;
    let p = cfg.smoothing()?;
    let u0 = cfg.initial_field(&grid)?;
    // snapshots at the sample cadence feed the time-integrated left side
    let mut ec = cfg.evolve_config();
    ec.snapshot_every = Some(cfg.sample_every);
    let probes = [Probe::MorawetzAction, Probe::L4Norm4, Probe::Mass];
    let outcome = evolve(&u0, &mp, &ec, &probes)?;

    write_series_csv(&out.join("morawetz.csv"), &outcome.series)?;
    write_manifest(&out.join("manifest.toml"), &run_manifest(&cfg, "morawetz"))?;

    println!(
        "morawetz: {} snapshot(s) over t = [0, {}], wrote {}",
        outcome.snapshots.len(),
        cfg.t_final,
        out.join("morawetz.csv").display()
    );
    if cfg.dimension >= 3 {
        let lhs = morawetz_lhs(&outcome.snapshots, &p)?;
        println!("  time-integrated interaction lhs: {lhs:.6e}");
    } else {
        println!("  time-integrated left side skipped (defined for dimension >= 3)");
    }
    Ok(EXIT_OK)
}

/// Un-pivot wide CSVs into source,x_name,x,series,value rows. The first
/// column of each input (time, n_threshold, ...) becomes the x axis.
fn report(inputs: &[PathBuf], out: &Path) -> Result<u8> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(w, "source,x_name,x,series,value")?;
    let mut total = 0usize;
    for path in inputs {
        let (names, rows) = read_csv(path)?;
        if names.is_empty() {
            return Err(LabError::InvalidParam(format!("{}: no columns", path.display())));
        }
        let source = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        for row in &rows {
            for (j, name) in names.iter().enumerate().skip(1) {
                if row[j].is_nan() {
                    continue;
                }
                writeln!(w, "{source},{},{},{name},{}", names[0], row[0], row[j])?;
                total += 1;
            }
        }
    }
    w.flush()?;
    println!("report: merged {} file(s) into {} ({total} rows)", inputs.len(), out.display());
    Ok(EXIT_OK)
}
