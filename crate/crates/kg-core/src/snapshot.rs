//! Binary snapshot format for lattice fields.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "KGF1"                       4 magic bytes
//! dim: u32
//! points: dim x u32            per-axis lattice size
//! lengths: dim x f64           per-axis box length
//! mass: f64
//! time: f64
//! phi: N^d x f64               row-major
//! pi:  N^d x f64               row-major
//! ```
//!
//! Readers validate the header, field invariants and the exact payload
//! length; writers round-trip bit-for-bit.

use crate::error::{KgError, Result};
use crate::field::{LatticeField, Mass};
use crate::grid::SpatialGrid;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"KGF1";

pub fn write_lattice<W: Write>(mut w: W, f: &LatticeField) -> Result<()> {
    w.write_all(MAGIC)?;
    let grid = f.grid();
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in grid.points() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in grid.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&f.mass().value().to_le_bytes())?;
    w.write_all(&f.time().to_le_bytes())?;
    for &x in f.phi() {
        w.write_all(&x.to_le_bytes())?;
    }
    for &x in f.pi() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_lattice<R: Read>(mut r: R) -> Result<LatticeField> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(KgError::SnapshotFormat(format!(
            "bad magic {:02x?}, expected \"KGF1\"",
            magic
        )));
    }
    let dim = read_u32(&mut r, "dim")? as usize;
    if dim == 0 || dim > 3 {
        return Err(KgError::SnapshotFormat(format!("bad dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(read_u32(&mut r, "points")? as usize);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(read_f64(&mut r, "lengths")?);
    }
    let grid = SpatialGrid::new(&points, &lengths)?;
    let mass = Mass::new(read_f64(&mut r, "mass")?)?;
    let time = read_f64(&mut r, "time")?;
    let n = grid.site_count();
    let mut phi = Vec::with_capacity(n);
    for _ in 0..n {
        phi.push(read_f64(&mut r, "phi")?);
    }
    let mut pi = Vec::with_capacity(n);
    for _ in 0..n {
        pi.push(read_f64(&mut r, "pi")?);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(KgError::SnapshotFormat(
            "trailing bytes after pi array".into(),
        ));
    }
    LatticeField::new(grid, mass, time, phi, pi)
}

pub fn write_lattice_file<P: AsRef<Path>>(path: P, f: &LatticeField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_lattice(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn read_lattice_file<P: AsRef<Path>>(path: P) -> Result<LatticeField> {
    read_lattice(BufReader::new(File::open(path)?))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| KgError::SnapshotFormat(format!("truncated while reading {what}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, what)?;
    Ok(f64::from_le_bytes(buf))
}
