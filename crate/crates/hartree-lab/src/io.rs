//! Run artifacts: diagnostics CSV, sweep CSV, TOML manifests, binary
//! state snapshots.
//!
//! Floats are written with the shortest representation that parses back to
//! the identical bit pattern (the standard library guarantees this for the
//! plain `{}` formatting), so CSV files round-trip losslessly. Snapshots
//! store raw little-endian f64 pairs behind a small self-describing header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::experiments::SweepResult;
use crate::functionals::DiagnosticsSeries;
use crate::grid::{make_grid, Field, Representation};

/// Wide-format diagnostics table: one `t` column and one column per probe,
/// sample times in recording order.
pub fn write_series_csv(path: &Path, series: &DiagnosticsSeries) -> Result<()> {
    let names = series.names().to_vec();
    let mut times: Vec<f64> = Vec::new();
    for (t, _, _) in series.rows() {
        if times.last() != Some(t) {
            times.push(*t);
        }
    }
    let mut table: Vec<Vec<Option<f64>>> = vec![vec![None; names.len()]; times.len()];
    let mut row_of = std::collections::HashMap::new();
    for (i, t) in times.iter().enumerate() {
        row_of.insert(t.to_bits(), i);
    }
    for (t, name, v) in series.rows() {
        let i = row_of[&t.to_bits()];
        let j = names.iter().position(|n| n == name).expect("name listed");
        table[i][j] = Some(*v);
    }
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "t")?;
    for n in &names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for (i, t) in times.iter().enumerate() {
        write!(w, "{t}")?;
        for cell in &table[i] {
            match cell {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a numeric CSV written by this module: header row of column names,
/// then f64 cells (empty cells come back as NaN).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::InvalidParam(format!("{}: empty csv", path.display())))??;
    let names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(names.len());
        for cell in line.split(',') {
            if cell.is_empty() {
                row.push(f64::NAN);
            } else {
                row.push(cell.parse::<f64>().map_err(|e| {
                    LabError::InvalidParam(format!("{}: bad cell {cell:?}: {e}", path.display()))
                })?);
            }
        }
        if row.len() != names.len() {
            return Err(LabError::InvalidParam(format!(
                "{}: row has {} cells, header has {}",
                path.display(),
                row.len(),
                names.len()
            )));
        }
        rows.push(row);
    }
    Ok((names, rows))
}

/// Sweep table. The two fitted slope columns appear only when the sweep
/// produced fits (at least three valid rows at s < 1); a single-threshold
/// sweep has no slope to report and the columns are omitted.
pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let with_slopes = result.increment_slope.is_some() || result.commutator_slope.is_some();
    write!(
        w,
        "n_threshold,s,lambda,iu_h1,sup_increment,commutator_l1l2,valid"
    )?;
    if with_slopes {
        write!(w, ",increment_slope,commutator_slope")?;
    }
    writeln!(w)?;
    for r in &result.rows {
        write!(
            w,
            "{},{},{},{},{},{},{}",
            r.n_threshold,
            r.s,
            r.lambda,
            r.iu_h1,
            r.sup_increment,
            r.commutator_l1l2,
            if r.valid { 1 } else { 0 }
        )?;
        if with_slopes {
            match result.increment_slope {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
            match result.commutator_slope {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a TOML manifest. Callers assemble the table (every input that
/// determines the run, including the seed and the crate version) and this
/// just serializes it.
pub fn write_manifest(path: &Path, table: &toml::value::Table) -> Result<()> {
    let text = toml::to_string_pretty(table)
        .map_err(|e| LabError::InvalidParam(format!("manifest serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<toml::value::Table> {
    let text = std::fs::read_to_string(path)?;
    text.parse::<toml::value::Table>()
        .map_err(|e| LabError::InvalidParam(format!("{}: {e}", path.display())))
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"HRTS";
const SNAPSHOT_VERSION: u32 = 1;

/// Binary state snapshot: magic, version, d, n, L, representation tag,
/// then interleaved little-endian (re, im) f64 pairs in flat index order.
pub fn write_snapshot(path: &Path, field: &Field) -> Result<()> {
    let g = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(g.d() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&g.len().to_le_bytes())?;
    w.write_all(&[match field.repr() {
        Representation::Physical => 0u8,
        Representation::Spectral => 1u8,
    }])?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(LabError::SnapshotFormat(format!(
            "{}: bad magic {magic:?}",
            path.display()
        )));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != SNAPSHOT_VERSION {
        return Err(LabError::SnapshotFormat(format!(
            "{}: version {version}, expected {SNAPSHOT_VERSION}",
            path.display()
        )));
    }
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let len = f64::from_le_bytes(b8);
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let repr = match tag[0] {
        0 => Representation::Physical,
        1 => Representation::Spectral,
        other => {
            return Err(LabError::SnapshotFormat(format!(
                "{}: unknown representation tag {other}",
                path.display()
            )))
        }
    };
    let grid = make_grid(d, n, len).map_err(|e| {
        LabError::SnapshotFormat(format!("{}: stored grid invalid: {e}", path.display()))
    })?;
    let mut vals = Vec::with_capacity(grid.modes());
    for _ in 0..grid.modes() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        vals.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(LabError::SnapshotFormat(format!(
            "{}: trailing bytes after {} values",
            path.display(),
            grid.modes()
        )));
    }
    Field::from_values(&grid, repr, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{SweepResult, SweepRow};
    use crate::grid::make_grid;
    use crate::initial_data::random_spectrum;

    #[test]
    fn csv_floats_round_trip_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let mut series = DiagnosticsSeries::new();
        let awkward = [
            1.0 / 3.0,
            0.1 + 0.2,
            -1.2345678901234567e-300,
            6.02214076e23,
            f64::MIN_POSITIVE / 4.0, // subnormal
            -0.0,
        ];
        for (i, v) in awkward.iter().enumerate() {
            series.push(i as f64 * 0.1, "alpha", *v).unwrap();
            series.push(i as f64 * 0.1, "beta", v * 7.0).unwrap();
        }
        write_series_csv(&path, &series).unwrap();
        let (names, rows) = read_csv(&path).unwrap();
        assert_eq!(names, ["t", "alpha", "beta"]);
        assert_eq!(rows.len(), awkward.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[0].to_bits(), (i as f64 * 0.1).to_bits());
            assert_eq!(row[1].to_bits(), awkward[i].to_bits());
            assert_eq!(row[2].to_bits(), (awkward[i] * 7.0).to_bits());
        }
    }

    #[test]
    fn sweep_csv_slope_columns_follow_the_fit() {
        let dir = tempfile::tempdir().unwrap();
        let row = |n: f64| SweepRow {
            n_threshold: n,
            s: 0.6,
            lambda: n,
            iu_h1: 1.0,
            sup_increment: 1.0 / n,
            commutator_l1l2: 2.0 / n,
            valid: true,
        };
        let single = SweepResult {
            rows: vec![row(4.0)],
            increment_slope: None,
            commutator_slope: None,
        };
        let p1 = dir.path().join("single.csv");
        write_sweep_csv(&p1, &single).unwrap();
        let (names, rows) = read_csv(&p1).unwrap();
        assert_eq!(
            names,
            ["n_threshold", "s", "lambda", "iu_h1", "sup_increment", "commutator_l1l2", "valid"]
        );
        assert_eq!(rows.len(), 1);
        let multi = SweepResult {
            rows: vec![row(4.0), row(8.0), row(16.0)],
            increment_slope: Some(-1.0),
            commutator_slope: Some(-1.0),
        };
        let p2 = dir.path().join("multi.csv");
        write_sweep_csv(&p2, &multi).unwrap();
        let (names2, rows2) = read_csv(&p2).unwrap();
        assert_eq!(names2.len(), 9);
        assert_eq!(names2[7], "increment_slope");
        assert_eq!(rows2[2][7], -1.0);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.toml");
        let mut table = toml::value::Table::new();
        table.insert("version".into(), toml::Value::String("0.1.0".into()));
        table.insert("seed".into(), toml::Value::Integer(42));
        let mut grid = toml::value::Table::new();
        grid.insert("n".into(), toml::Value::Integer(64));
        grid.insert("len".into(), toml::Value::Float(32.0));
        table.insert("grid".into(), toml::Value::Table(grid));
        write_manifest(&path, &table).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(3, 8, 5.5).unwrap();
        for (name, field) in [
            ("spec.bin", random_spectrum(&g, 3, 5)),
            ("phys.bin", random_spectrum(&g, 3, 5).to_physical()),
        ] {
            let path = dir.path().join(name);
            write_snapshot(&path, &field).unwrap();
            let back = read_snapshot(&path).unwrap();
            assert_eq!(back.repr(), field.repr());
            assert_eq!(back.grid(), field.grid());
            assert_eq!(back.values(), field.values());
        }
    }

    #[test]
    fn snapshot_rejects_foreign_and_truncated_files() {
        let dir = tempfile::tempdir().unwrap();
        let bad_magic = dir.path().join("other.bin");
        std::fs::write(&bad_magic, b"NOPE0000000000000000000000").unwrap();
        assert!(matches!(read_snapshot(&bad_magic), Err(LabError::SnapshotFormat(_))));

        let g = make_grid(1, 8, 2.0).unwrap();
        let field = random_spectrum(&g, 2, 9);
        let full = dir.path().join("full.bin");
        write_snapshot(&full, &field).unwrap();
        let bytes = std::fs::read(&full).unwrap();
        let cut = dir.path().join("cut.bin");
        std::fs::write(&cut, &bytes[..bytes.len() - 9]).unwrap();
        assert!(read_snapshot(&cut).is_err());
        let padded = dir.path().join("padded.bin");
        let mut grown = bytes.clone();
        grown.push(0);
        std::fs::write(&padded, &grown).unwrap();
        assert!(matches!(read_snapshot(&padded), Err(LabError::SnapshotFormat(_))));
    }
}
