//! Field snapshots on disk.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "NLSF"            magic
//! u32               format version (currently 1)
//! u32               d
//! u32 × d           points per axis
//! f64 × d           half-extent per axis (domain [-l, l))
//! f64               time tag
//! (f64, f64) × N    re, im — row-major, axis 0 slowest
//! ```
//!
//! Every number round-trips exactly: write → read → write is byte-identical.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nlslab_core::{C64, ComplexField, Grid};

pub const MAGIC: [u8; 4] = *b"NLSF";
pub const VERSION: u32 = 1;

pub fn write_snapshot(path: &Path, u: &ComplexField) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = u.grid();
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.ndim() as u32).to_le_bytes())?;
    for &n in grid.dims() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in grid.extents() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&u.time_tag().to_le_bytes())?;
    for z in u.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_snapshot(path: &Path) -> Result<ComplexField> {
    let mut r = BufReader::new(
        File::open(path).with_context(|| format!("opening snapshot {}", path.display()))?,
    );
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .with_context(|| format!("reading snapshot {}", path.display()))?;
    if magic != MAGIC {
        bail!("{}: not a field snapshot (bad magic)", path.display());
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        bail!(
            "{}: unsupported snapshot version {version} (expected {VERSION})",
            path.display()
        );
    }
    let d = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&d) {
        bail!("{}: snapshot dimension {d} out of range", path.display());
    }
    let mut dims = Vec::with_capacity(d);
    for _ in 0..d {
        dims.push(read_u32(&mut r)? as usize);
    }
    let mut extents = Vec::with_capacity(d);
    for _ in 0..d {
        extents.push(read_f64(&mut r)?);
    }
    let time_tag = read_f64(&mut r)?;
    let grid = Grid::new(&dims, &extents)
        .with_context(|| format!("{}: snapshot grid is invalid", path.display()))?;

    let total = grid.len();
    let mut raw = vec![0u8; total * 16];
    r.read_exact(&mut raw)
        .with_context(|| format!("{}: truncated snapshot", path.display()))?;
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        bail!("{}: trailing bytes after field data", path.display());
    }
    let values: Vec<C64> = raw
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(ComplexField::from_values(&grid, values, time_tag)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlslab_core::random_smooth_field;

    #[test]
    fn round_trip_is_byte_identical() {
        let grid = Grid::cubic(2, 16, 5.0).unwrap();
        let mut u = random_smooth_field(&grid, 42, 1.3, 4);
        u.set_time_tag(0.625);
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.nlsf");
        let b = dir.path().join("b.nlsf");
        write_snapshot(&a, &u).unwrap();
        let v = read_snapshot(&a).unwrap();
        assert_eq!(v.time_tag(), 0.625);
        assert_eq!(v.grid().dims(), grid.dims());
        assert_eq!(v.values(), u.values());
        write_snapshot(&b, &v).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.nlsf");
        std::fs::write(&p, b"JUNKJUNKJUNK").unwrap();
        assert!(read_snapshot(&p).is_err());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let grid = Grid::cubic(1, 16, 5.0).unwrap();
        let u = random_smooth_field(&grid, 7, 1.0, 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.nlsf");
        write_snapshot(&p, &u).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read_snapshot(&p).is_err());
    }
}
