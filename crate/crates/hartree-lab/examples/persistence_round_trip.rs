//! Config, CSV and snapshot plumbing in one pass: parse a config with the
//! collect-every-violation contract, run it, and round-trip the outputs.
//! CSV floats are written shortest-round-trip, so re-parsing reproduces the
//! exact bits; snapshots store raw little-endian pairs.
//!
//!     cargo run --release --example persistence_round_trip

use hartree_lab::config::parse_config;
use hartree_lab::dynamics::evolve;
use hartree_lab::io::{read_csv, read_snapshot, write_series_csv, write_snapshot};

fn main() -> hartree_lab::Result<()> {
    // one bad key and two bad values: all three come back at once
    let broken = "[grid]\nmodez = 64\n\n[model]\ngamma = 9.0\n\n[evolution]\ndt = 5.0\n";
    let problems = parse_config(broken).unwrap_err();
    println!("a broken config reports every problem in one pass:");
    for p in &problems {
        println!("  - {p}");
    }

    let cfg = parse_config(
        "[grid]\ndimension = 1\nmodes = 256\nlength = 32.0\n\n[model]\ngamma = 0.5\n\n[evolution]\ndt = 1e-3\nt_final = 0.05\nsample_every = 10\n",
    )
    .expect("valid config");
    let grid = cfg.grid()?;
    let u0 = cfg.initial_field(&grid)?;
    let out = evolve(&u0, &cfg.model()?, &cfg.evolve_config(), &cfg.probe_list()?)?;

    let dir = std::env::temp_dir().join("hartree-lab-example");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("series.csv");
    write_series_csv(&csv, &out.series)?;
    let (names, rows) = read_csv(&csv)?;
    println!("\nwrote and re-read {}:", csv.display());
    println!("  columns: {names:?}");
    println!("  rows: {}", rows.len());
    let original = out.series.values("mass");
    let reread: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let bit_exact = original
        .iter()
        .zip(&reread)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("  mass column re-parses bit-exactly: {bit_exact}");

    let snap = dir.join("final.snap");
    write_snapshot(&snap, &out.final_state)?;
    let back = read_snapshot(&snap)?;
    let same = back
        .values()
        .iter()
        .zip(out.final_state.values())
        .all(|(a, b)| a == b);
    println!("\nsnapshot round trip preserves every coefficient: {same}");
    Ok(())
}
