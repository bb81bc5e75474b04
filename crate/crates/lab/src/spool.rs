//! Binary draw spools.
//!
//! Layout: the 8 magic bytes `STNSPOOL`, a little-endian `u32` version
//! (currently 1), a little-endian `u32` field count `k`, then records of
//! `k` little-endian `f64` values each, back to back.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"STNSPOOL";
pub const VERSION: u32 = 1;

/// Field names of permutation zero-bias records.
pub const ZERO_BIAS_FIELDS: [&str; 11] =
    ["y", "y_dagger", "y_ddagger", "y_star", "u", "s", "t_prime", "t_dagger", "t_ddagger", "touched_count", "gap"];
/// Field names of `(Y, partner, gap)` records from the other constructions.
pub const PAIR_FIELDS: [&str; 3] = ["y", "partner", "gap"];

#[derive(Debug, thiserror::Error)]
pub enum SpoolError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a spool file")]
    BadMagic,
    #[error("unsupported spool version {0}")]
    Version(u32),
    #[error("record has {got} fields, spool expects {expected}")]
    Width { got: usize, expected: usize },
    #[error("file ends inside a record")]
    Truncated,
}

pub struct SpoolWriter<W: Write> {
    inner: W,
    fields: usize,
    records: u64,
}

impl SpoolWriter<BufWriter<File>> {
    pub fn create(path: &Path, fields: usize) -> Result<Self, SpoolError> {
        SpoolWriter::new(BufWriter::new(File::create(path)?), fields)
    }
}

impl<W: Write> SpoolWriter<W> {
    pub fn new(mut inner: W, fields: usize) -> Result<Self, SpoolError> {
        inner.write_all(MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(&(fields as u32).to_le_bytes())?;
        Ok(SpoolWriter { inner, fields, records: 0 })
    }

    pub fn write(&mut self, record: &[f64]) -> Result<(), SpoolError> {
        if record.len() != self.fields {
            return Err(SpoolError::Width { got: record.len(), expected: self.fields });
        }
        for v in record {
            self.inner.write_all(&v.to_le_bytes())?;
        }
        self.records += 1;
        Ok(())
    }

    /// Appends pre-encoded records.
    pub fn write_raw(&mut self, bytes: &[u8]) -> Result<(), SpoolError> {
        let width = 8 * self.fields;
        if bytes.len() % width != 0 {
            return Err(SpoolError::Truncated);
        }
        self.inner.write_all(bytes)?;
        self.records += (bytes.len() / width) as u64;
        Ok(())
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn finish(mut self) -> Result<W, SpoolError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn encode(record: &[f64], out: &mut Vec<u8>) {
    for v in record {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Field count and all records.
pub fn read_spool<R: Read>(reader: R) -> Result<(usize, Vec<Vec<f64>>), SpoolError> {
    let mut bytes = Vec::new();
    BufReader::new(reader).read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(SpoolError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(SpoolError::Version(version));
    }
    let fields = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if fields == 0 || body.len() % (8 * fields) != 0 {
        return Err(SpoolError::Truncated);
    }
    let records = body
        .chunks_exact(8 * fields)
        .map(|r| r.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok((fields, records))
}

pub fn read_spool_file(path: &Path) -> Result<(usize, Vec<Vec<f64>>), SpoolError> {
    read_spool(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut w = SpoolWriter::new(Vec::new(), 3).unwrap();
        w.write(&[1.0, -2.5, f64::MIN_POSITIVE]).unwrap();
        let mut raw = Vec::new();
        encode(&[4.0, 5.0, 6.0], &mut raw);
        w.write_raw(&raw).unwrap();
        assert!(matches!(w.write(&[1.0]), Err(SpoolError::Width { .. })));
        assert_eq!(w.records(), 2);
        let bytes = w.finish().unwrap();
        assert_eq!(bytes.len(), 16 + 2 * 24);
        let (k, recs) = read_spool(bytes.as_slice()).unwrap();
        assert_eq!(k, 3);
        assert_eq!(recs, vec![vec![1.0, -2.5, f64::MIN_POSITIVE], vec![4.0, 5.0, 6.0]]);
        assert!(matches!(read_spool(&bytes[..bytes.len() - 1]), Err(SpoolError::Truncated)));
        assert!(matches!(read_spool(&b"nope"[..]), Err(SpoolError::BadMagic)));
    }
}
