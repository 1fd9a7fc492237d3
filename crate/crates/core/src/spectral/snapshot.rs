//! `MXC1` binary snapshots: magic, `u32` dimension count, `u32` n, then
//! `n^d` little-endian `f64` values in row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MXC1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dims: u32,
    pub n: u32,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn new(dims: u32, n: u32, values: Vec<f64>) -> Result<Self> {
        if dims != 2 && dims != 6 {
            return Err(Error::Format(format!("unsupported dimension count {dims}")));
        }
        let expected = (n as usize).pow(dims);
        if values.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { dims, n, values })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.dims.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 12];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let dims = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
        let n = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
        if dims != 2 && dims != 6 {
            return Err(Error::Format(format!("unsupported dimension count {dims}")));
        }
        let count = (n as usize)
            .checked_pow(dims)
            .ok_or_else(|| Error::Format("lattice too large".into()))?;
        let mut raw = vec![0u8; count * 8];
        r.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { dims, n, values })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let s = Snapshot::new(2, 4, (0..16).map(f64::from).collect()).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"MXC1");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(&buf[8..12], &4u32.to_le_bytes());
        assert_eq!(buf.len(), 12 + 16 * 8);
        assert_eq!(Snapshot::read_from(&buf[..]).unwrap(), s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Snapshot::new(3, 4, vec![0.0; 64]).is_err());
        assert!(Snapshot::read_from(&b"XXXX\0\0\0\0\0\0\0\0"[..]).is_err());
    }
}
