//! Binary checkpoints.
//!
//! Little-endian layout:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `TFCK` |
//! | 4 | `u32` format version (1) |
//! | 4 | `u32` spatial dimension |
//! | 4 | `u32` coordinates per node (2 or 7) |
//! | 24 | `u64 × 3` grid node counts |
//! | 8 | `f64` spacing `h` |
//! | 24 | `i64 × 3` integer grid origin |
//! | 24 | `f64 × 3` `ε, δ₁, δ₂` |
//! | 8 | `u64` iteration |
//! | 1 | `u8` boundary mode (0 strong, 1 weak) |
//! | 4 + n | `u32` length and UTF-8 TOML of the domain shape |
//! | 8 | `u64` active node count `N` |
//! | N × (1 + 8·stride) | per node: `u8` fixed flag, then the coordinates |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{BcMode, FieldParams, Target, TensorField};
use crate::grid::{build_domain, Shape};

const MAGIC: &[u8; 4] = b"TFCK";
const VERSION: u32 = 1;

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

pub fn write_checkpoint_to<W: Write>(w: &mut W, field: &TensorField, iteration: u64) -> Result<()> {
    let d = &field.domain;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(d.dim as u32).to_le_bytes())?;
    w.write_all(&(field.stride() as u32).to_le_bytes())?;
    for n in d.dims {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&d.h.to_le_bytes())?;
    for o in d.origin {
        w.write_all(&o.to_le_bytes())?;
    }
    for p in [field.params.eps, field.params.delta1, field.params.delta2] {
        w.write_all(&p.to_le_bytes())?;
    }
    w.write_all(&iteration.to_le_bytes())?;
    w.write_all(&[match field.bc_mode {
        BcMode::Strong => 0u8,
        BcMode::Weak => 1,
    }])?;
    let shape = toml::to_string(&d.shape).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(&(shape.len() as u32).to_le_bytes())?;
    w.write_all(shape.as_bytes())?;
    w.write_all(&(field.n_nodes() as u64).to_le_bytes())?;
    for o in 0..field.n_nodes() {
        w.write_all(&[field.fixed[o] as u8])?;
        for v in field.node(o) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Writes a checkpoint, replacing `path` atomically.
pub fn write_checkpoint(path: &Path, field: &TensorField, iteration: u64) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_checkpoint_to(&mut w, field, iteration)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated checkpoint: {e}")))?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

/// Reads a checkpoint and rebuilds its grid; returns the field and the stored iteration.
pub fn read_checkpoint_from<R: Read>(r: &mut R) -> Result<(TensorField, u64)> {
    if &read_array::<4, _>(r)? != MAGIC {
        return format_err("not a checkpoint file (bad magic)");
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return format_err(format!("unsupported checkpoint version {version}"));
    }
    let dim = read_u32(r)? as usize;
    let target = match read_u32(r)? {
        2 => Target::Mb,
        7 => Target::Tetra,
        s => return format_err(format!("unsupported node stride {s}")),
    };
    let dims = [read_u64(r)? as usize, read_u64(r)? as usize, read_u64(r)? as usize];
    let h = read_f64(r)?;
    let origin = [read_u64(r)? as i64, read_u64(r)? as i64, read_u64(r)? as i64];
    let params = FieldParams::new(read_f64(r)?, read_f64(r)?, read_f64(r)?);
    let iteration = read_u64(r)?;
    let bc_mode = match read_array::<1, _>(r)?[0] {
        0 => BcMode::Strong,
        1 => BcMode::Weak,
        m => return format_err(format!("unknown boundary mode {m}")),
    };
    let len = read_u32(r)? as usize;
    if len > 1 << 16 {
        return format_err("shape description too long");
    }
    let mut shape_bytes = vec![0u8; len];
    r.read_exact(&mut shape_bytes).map_err(|e| Error::Format(format!("truncated checkpoint: {e}")))?;
    let shape_text = String::from_utf8(shape_bytes).map_err(|e| Error::Format(e.to_string()))?;
    let shape: Shape = toml::from_str(&shape_text).map_err(|e| Error::Format(e.to_string()))?;
    let domain = build_domain(&shape, h)?;
    if domain.dim != dim || domain.dims != dims || domain.origin != origin {
        return format_err("grid header does not match the rebuilt domain");
    }
    let n = read_u64(r)? as usize;
    if n != domain.n_active() {
        return format_err(format!("checkpoint has {n} nodes, domain has {}", domain.n_active()));
    }
    let mut field = TensorField::zeros(domain, target, params, bc_mode)?;
    for o in 0..n {
        field.fixed[o] = read_array::<1, _>(r)?[0] != 0;
        for a in 0..target.stride() {
            field.node_mut(o)[a] = read_f64(r)?;
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return format_err("trailing bytes after node data");
    }
    Ok((field, iteration))
}

pub fn read_checkpoint(path: &Path) -> Result<(TensorField, u64)> {
    read_checkpoint_from(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{seed_field, SeedSpec};

    #[test]
    fn round_trip_is_bitwise() {
        let d = build_domain(&Shape::TriangleWithHole { circumradius: 1.0, hole_radius: 0.25, hole_center: [0.0, 0.0] }, 0.1).unwrap();
        let f = seed_field(d, Target::Mb, FieldParams::new(0.04, 1.0, 1.0), BcMode::Strong, &SeedSpec::Zero, &SeedSpec::Normal { theta: None }, 0.1, 5)
            .unwrap();
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, &f, 42).unwrap();
        let (g, it) = read_checkpoint_from(&mut buf.as_slice()).unwrap();
        assert_eq!(it, 42);
        assert_eq!(g.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), f.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(g.fixed, f.fixed);
        assert_eq!(g.params, f.params);
        assert_eq!(g.domain.shape, f.domain.shape);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let d = build_domain(&Shape::Ball { radius: 1.0 }, 0.25).unwrap();
        let f = TensorField::zeros(d, Target::Tetra, FieldParams::new(0.1, 0.02, 0.02), BcMode::Weak).unwrap();
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, &f, 0).unwrap();
        assert!(read_checkpoint_from(&mut &buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint_from(&mut bad.as_slice()), Err(Error::Format(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(read_checkpoint_from(&mut long.as_slice()).is_err());
        assert!(read_checkpoint_from(&mut buf.as_slice()).is_ok());
    }
}
