//! MUSK1 field snapshots and `x1,x2,value` CSV export.
//!
//! A snapshot is the 8-byte magic `MUSK1\0\0\0`, then little-endian
//! `u32 n`, `f64 period`, `f64 time` and `n*n` row-major `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::{InterfaceField, PeriodicGrid};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"MUSK1\0\0\0";

pub fn encode_snapshot(field: &InterfaceField) -> Vec<u8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(28 + 8 * field.values.len());
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.period().to_le_bytes());
    out.extend_from_slice(&field.time.to_le_bytes());
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<InterfaceField> {
    if bytes.len() < 28 || bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("missing MUSK1 header".into()));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4-byte slice")) as usize;
    let period = f64::from_le_bytes(word(12));
    let time = f64::from_le_bytes(word(20));
    let expected = n
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(28))
        .ok_or_else(|| Error::Snapshot(format!("grid size {n} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let grid = PeriodicGrid::new(period, n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let values = (0..n * n).map(|k| f64::from_le_bytes(word(28 + 8 * k))).collect();
    InterfaceField::new(grid, values, time).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn write_snapshot(path: &Path, field: &InterfaceField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_snapshot(field))?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<InterfaceField> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}

/// Writes any grid-shaped array as CSV rows `x1,x2,value`.
pub fn write_field_csv(path: &Path, grid: &PeriodicGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Configuration(format!(
            "array of length {} does not match an {}x{} grid",
            values.len(),
            grid.n(),
            grid.n()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x1,x2,value")?;
    for i in 0..grid.n() {
        for j in 0..grid.n() {
            let x = grid.point(i, j);
            writeln!(w, "{},{},{}", x[0], x[1], values[grid.index(i, j)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let g = PeriodicGrid::new(3.7, 8).unwrap();
        let f = InterfaceField::from_fn(g, 1.25, |x| (x[0] * 1.3).sin() + x[1] / 7.0).unwrap();
        let back = decode_snapshot(&encode_snapshot(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = PeriodicGrid::new(1.0, 8).unwrap();
        let mut bytes = encode_snapshot(&InterfaceField::constant(g, 0.0).unwrap());
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(decode_snapshot(&bytes).is_err());
    }
}
