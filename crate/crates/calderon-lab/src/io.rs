//! Scalar grid dumps: one ASCII header line, then raw little-endian f64
//! values with the last axis fastest (the in-memory layout).

use crate::error::{Error, Result};
use crate::grid::{Grid3D, ScalarField};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub fn write_scalar_grid(path: &Path, field: &ScalarField<f64>) -> Result<()> {
    let g = field.grid;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "grid {} {} {} {} {} {} {} f64",
        g.n[0], g.n[1], g.n[2], g.h, g.origin[0], g.origin[1], g.origin[2]
    )?;
    for &v in &field.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scalar_grid(path: &Path) -> Result<ScalarField<f64>> {
    let mut f = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Config(format!("{}: missing grid header", path.display())))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::Config(format!("{}: non-ascii grid header", path.display())))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad = || Error::Config(format!("{}: bad grid header {header:?}", path.display()));
    if parts.len() != 9 || parts[0] != "grid" || parts[8] != "f64" {
        return Err(bad());
    }
    let n = [
        parts[1].parse::<usize>().map_err(|_| bad())?,
        parts[2].parse::<usize>().map_err(|_| bad())?,
        parts[3].parse::<usize>().map_err(|_| bad())?,
    ];
    let h = parts[4].parse::<f64>().map_err(|_| bad())?;
    let origin = [
        parts[5].parse::<f64>().map_err(|_| bad())?,
        parts[6].parse::<f64>().map_err(|_| bad())?,
        parts[7].parse::<f64>().map_err(|_| bad())?,
    ];
    let grid = Grid3D::new(n, h, origin)?;
    let body = &bytes[nl + 1..];
    if body.len() != grid.len() * 8 {
        return Err(Error::Config(format!(
            "{}: payload is {} bytes, header promises {}",
            path.display(),
            body.len(),
            grid.len() * 8
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(ScalarField { grid, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_bits() {
        let grid = Grid3D::cube(9, 1.0).unwrap();
        let f = ScalarField::from_fn(grid, |x| (x[0] * 1.7 - x[2]).sin() * 0.3 + x[1]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.grid");
        write_scalar_grid(&p, &f).unwrap();
        let back = read_scalar_grid(&p).unwrap();
        assert_eq!(back.grid.n, grid.n);
        assert_eq!(back.grid.h, grid.h);
        assert_eq!(back.data, f.data);
    }

    #[test]
    fn truncated_payloads_are_rejected() {
        let grid = Grid3D::cube(6, 1.0).unwrap();
        let f = ScalarField::from_fn(grid, |x| x[0]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.grid");
        write_scalar_grid(&p, &f).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 4]).unwrap();
        assert_eq!(read_scalar_grid(&p).unwrap_err().exit_code(), 2);
    }
}
