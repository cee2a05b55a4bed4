//! Binary field snapshots: one JSON header line followed by little-endian f64 values.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FieldSample, GridSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub spacing: f64,
    pub side: f64,
    pub pad_factor: usize,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub seed_path: String,
}

pub fn write_snapshot(path: &Path, field: &FieldSample) -> Result<()> {
    let header = SnapshotHeader {
        n: field.grid.n,
        spacing: field.grid.spacing(),
        side: field.grid.side,
        pad_factor: field.grid.pad_factor,
        scale_lo: field.scale_lo,
        scale_hi: field.scale_hi,
        seed_path: field.seed_path.clone(),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<FieldSample> {
    let mut input = BufReader::new(std::fs::File::open(path)?);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    let grid = GridSpec::new(header.n, header.side, header.pad_factor)?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.cells() {
        return Err(Error::InvalidArgument(format!(
            "snapshot holds {} bytes, expected {}",
            bytes.len(),
            8 * grid.cells()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldSample {
        grid,
        scale_lo: header.scale_lo,
        scale_hi: header.scale_hi,
        seed_path: header.seed_path,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let grid = GridSpec::unit(4).unwrap();
        let mut f = FieldSample::from_fn(grid, |x, y| x - 3.0 * y + 0.1);
        f.scale_hi = 1.5;
        write_snapshot(&path, &f).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), f);
        let raw = std::fs::read(&path).unwrap();
        let nl = raw.iter().position(|b| *b == b'\n').unwrap();
        assert_eq!(raw.len() - nl - 1, 16 * 8);
    }
}
