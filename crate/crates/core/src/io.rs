//! Binary field dumps.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "LSPF" | version: u32 | n: u32 | R: f64 | t: f64 | n³ × f64 | crc32: u32
//! ```
//!
//! Values follow the centred row-major storage of [`crate::grid`]; the CRC
//! covers the value block. The same file serves as a custom initial
//! condition and as a restart point.

use std::fs;
use std::path::Path;

use crate::error::{LandauError, Result};
use crate::field::DistributionField;
use crate::grid::VelocityGrid;

const MAGIC: &[u8; 4] = b"LSPF";
const VERSION: u32 = 1;

/// A field together with the time it was written at.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub t: f64,
    pub field: DistributionField,
}

pub fn store_field(field: &DistributionField, t: f64, path: impl AsRef<Path>) -> Result<()> {
    let grid = field.grid();
    let mut bytes = Vec::with_capacity(28 + 8 * grid.len() + 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    bytes.extend_from_slice(&grid.half_width().to_le_bytes());
    bytes.extend_from_slice(&t.to_le_bytes());
    append_values_with_crc(&mut bytes, field.values());
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<FieldDump> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut r = Reader::new(path, &bytes);
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let n = r.u32()? as usize;
    let half_width = r.f64()?;
    let t = r.f64()?;
    let grid = VelocityGrid::new(n, half_width).map_err(|e| r.corrupt(&e.to_string()))?;
    let values = r.values_with_crc(grid.len())?;
    r.finish()?;
    let field = DistributionField::new(grid, values).map_err(|e| r.corrupt(&e.to_string()))?;
    Ok(FieldDump { t, field })
}

pub(crate) fn append_values_with_crc(bytes: &mut Vec<u8>, values: &[f64]) {
    let start = bytes.len();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&bytes[start..]);
    bytes.extend_from_slice(&crc.to_le_bytes());
}

/// Bounds-checked little-endian cursor over a file's bytes.
pub(crate) struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, pos: 0 }
    }

    pub(crate) fn corrupt(&self, reason: &str) -> LandauError {
        LandauError::Integrity { path: self.path.to_path_buf(), reason: reason.to_string() }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(self.corrupt("truncated file"));
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        if self.take(4)? != expected {
            return Err(self.corrupt("bad magic bytes"));
        }
        Ok(())
    }

    pub(crate) fn version(&mut self, expected: u32) -> Result<()> {
        let v = self.u32()?;
        if v != expected {
            return Err(self.corrupt(&format!("unsupported version {v}")));
        }
        Ok(())
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn values_with_crc(&mut self, count: usize) -> Result<Vec<f64>> {
        let block = self.take(8 * count)?;
        let crc = self.u32()?;
        if crc32fast::hash(block) != crc {
            return Err(self.corrupt("checksum mismatch"));
        }
        Ok(block
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.corrupt("trailing bytes"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DistributionField {
        let g = VelocityGrid::new(4, 1.5).unwrap();
        DistributionField::from_fn(g, |v| (v[0] - 0.3 * v[1]).exp() + v[2])
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.lspf");
        let f = sample();
        store_field(&f, 0.125, &path).unwrap();
        let back = load_field(&path).unwrap();
        assert_eq!(back.t, 0.125);
        assert_eq!(back.field, f);
    }

    #[test]
    fn header_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.lspf");
        store_field(&sample(), 2.0, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"LSPF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 2.0);
        assert_eq!(bytes.len(), 28 + 64 * 8 + 4);
    }

    #[test]
    fn detects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.lspf");
        store_field(&sample(), 0.0, &path).unwrap();
        let bytes = fs::read(&path).unwrap();

        fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(load_field(&path), Err(LandauError::Integrity { .. })));

        let mut flipped = bytes.clone();
        flipped[100] ^= 0x40;
        fs::write(&path, &flipped).unwrap();
        let err = load_field(&path).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");

        let mut magic = bytes;
        magic[0] = b'X';
        fs::write(&path, &magic).unwrap();
        assert!(load_field(&path).is_err());
    }
}
