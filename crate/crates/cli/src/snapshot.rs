//! Binary snapshot files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size | content                                            |
//! |--------|------|----------------------------------------------------|
//! | 0      | 8    | magic `TRSWSNAP`                                   |
//! | 8      | 4    | format version (u32, currently 1)                  |
//! | 12     | 4    | mesh kind (u32): 0 cubed sphere, 1 periodic plane  |
//! | 16     | 4    | `n` (sphere) or `nx` (plane), u32                  |
//! | 20     | 4    | 0 (sphere) or `ny` (plane), u32                    |
//! | 24     | 4    | polynomial order `p`, u32                          |
//! | 28     | 4    | number of fields `F`, u32                          |
//! | 32     | 8    | step index, u64                                    |
//! | 40     | 8    | time in seconds, f64                               |
//! | 48     | 8    | radius (sphere) or `lx` (plane), f64               |
//! | 56     | 8    | 0 (sphere) or `ly` (plane), f64                    |
//! | 64     | 16 F | field names, ASCII, NUL padded to 16 bytes each    |
//! | ...    | 8 FN | field blocks, `N` f64 values each                  |
//!
//! `N = elements * (p + 1)^2` with nodes ordered element-major, then node
//! row-major (`j * (p + 1) + i`, `i` along the first reference direction).

use std::io::{Read, Write};
use std::path::Path;

use trsw_core::MeshKind;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"TRSWSNAP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;
pub const NAME_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub kind: MeshKind,
    pub order: usize,
    pub step: u64,
    pub t: f64,
    pub fields: Vec<(String, Vec<f64>)>,
}

fn elements(kind: &MeshKind) -> usize {
    match *kind {
        MeshKind::CubedSphere { n, .. } => 6 * n * n,
        MeshKind::PeriodicPlane { nx, ny, .. } => nx * ny,
    }
}

impl Snapshot {
    pub fn n_nodes(&self) -> usize {
        elements(&self.kind) * (self.order + 1).pow(2)
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let nn = self.n_nodes();
        let mut header = [0u8; HEADER_LEN];
        let (code, a, b, ea, eb) = match self.kind {
            MeshKind::CubedSphere { radius, n } => (0u32, n as u32, 0u32, radius, 0.0),
            MeshKind::PeriodicPlane { lx, ly, nx, ny } => (1, nx as u32, ny as u32, lx, ly),
        };
        header[0..8].copy_from_slice(MAGIC);
        header[8..12].copy_from_slice(&VERSION.to_le_bytes());
        header[12..16].copy_from_slice(&code.to_le_bytes());
        header[16..20].copy_from_slice(&a.to_le_bytes());
        header[20..24].copy_from_slice(&b.to_le_bytes());
        header[24..28].copy_from_slice(&(self.order as u32).to_le_bytes());
        header[28..32].copy_from_slice(&(self.fields.len() as u32).to_le_bytes());
        header[32..40].copy_from_slice(&self.step.to_le_bytes());
        header[40..48].copy_from_slice(&self.t.to_le_bytes());
        header[48..56].copy_from_slice(&ea.to_le_bytes());
        header[56..64].copy_from_slice(&eb.to_le_bytes());
        out.write_all(&header)?;
        for (name, values) in &self.fields {
            if name.len() > NAME_LEN || !name.is_ascii() {
                return Err(CliError::Snapshot(format!("bad field name `{name}`")));
            }
            if values.len() != nn {
                return Err(CliError::Snapshot(format!(
                    "field `{name}` has {} values, expected {nn}",
                    values.len()
                )));
            }
            let mut buf = [0u8; NAME_LEN];
            buf[..name.len()].copy_from_slice(name.as_bytes());
            out.write_all(&buf)?;
        }
        let mut block = Vec::with_capacity(8 * nn);
        for (_, values) in &self.fields {
            block.clear();
            for v in values {
                block.extend_from_slice(&v.to_le_bytes());
            }
            out.write_all(&block)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        input.read_exact(&mut header)?;
        if &header[0..8] != MAGIC {
            return Err(CliError::Snapshot("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(CliError::Snapshot(format!("unsupported version {version}")));
        }
        let (a, b) = (u32_at(16) as usize, u32_at(20) as usize);
        let kind = match u32_at(12) {
            0 => MeshKind::CubedSphere {
                radius: f64_at(48),
                n: a,
            },
            1 => MeshKind::PeriodicPlane {
                lx: f64_at(48),
                ly: f64_at(56),
                nx: a,
                ny: b,
            },
            k => return Err(CliError::Snapshot(format!("unknown mesh kind {k}"))),
        };
        let order = u32_at(24) as usize;
        let nfields = u32_at(28) as usize;
        let step = u64::from_le_bytes(header[32..40].try_into().unwrap());
        let t = f64_at(40);
        let mut names = Vec::with_capacity(nfields);
        for _ in 0..nfields {
            let mut buf = [0u8; NAME_LEN];
            input.read_exact(&mut buf)?;
            let end = buf.iter().position(|&c| c == 0).unwrap_or(NAME_LEN);
            let name = std::str::from_utf8(&buf[..end])
                .map_err(|_| CliError::Snapshot("field name is not ASCII".into()))?;
            names.push(name.to_string());
        }
        let nn = elements(&kind) * (order + 1).pow(2);
        let mut fields = Vec::with_capacity(nfields);
        let mut raw = vec![0u8; 8 * nn];
        for name in names {
            input.read_exact(&mut raw)?;
            let values = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            fields.push((name, values));
        }
        Ok(Self {
            kind,
            order,
            step,
            t,
            fields,
        })
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let nn = 6 * 4 * 9;
        Snapshot {
            kind: MeshKind::CubedSphere {
                radius: 6.37122e6,
                n: 2,
            },
            order: 2,
            step: 42,
            t: 1234.5,
            fields: vec![
                (
                    "h".into(),
                    (0..nn).map(|i| i as f64 * 0.1 + 1e-17).collect(),
                ),
                (
                    "vorticity".into(),
                    (0..nn).map(|i| (i as f64).sin()).collect(),
                ),
            ],
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = sample();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 2 * NAME_LEN + 2 * 8 * s.n_nodes());
        let r = Snapshot::read(buf.as_slice()).unwrap();
        assert_eq!(r, s);
        let plane = Snapshot {
            kind: MeshKind::PeriodicPlane {
                lx: 3.0,
                ly: 2.0,
                nx: 3,
                ny: 2,
            },
            order: 1,
            step: 0,
            t: 0.0,
            fields: vec![("b".into(), vec![9.8; 24])],
        };
        let mut buf = Vec::new();
        plane.write(&mut buf).unwrap();
        assert_eq!(Snapshot::read(buf.as_slice()).unwrap(), plane);
    }

    #[test]
    fn rejects_bad_input() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Snapshot::read(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(Snapshot::read(bad.as_slice()).is_err());
        assert!(Snapshot::read(&buf[..buf.len() - 1]).is_err());
        let mut s = sample();
        s.fields[0].1.pop();
        assert!(s.write(Vec::new()).is_err());
    }
}
