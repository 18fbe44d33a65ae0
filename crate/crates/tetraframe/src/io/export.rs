//! Plain-text exports: per-node CSV and legacy VTK structured points.
//!
//! Floats are written in the shortest form that parses back to the same
//! value, so CSV import reproduces a field bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::analysis::singular::field_threshold;
use crate::analysis::winding::FIELD_RECOVERY_TOL;
use crate::error::{Error, Result};
use crate::field::{Target, TensorField};
use crate::grid::NONE;
use crate::recovery::{mb_angle, recover_tetrahedron};

/// Column names: coordinates, tensor coordinates, `W`, singular flag.
pub fn csv_header(field: &TensorField) -> String {
    let mut cols: Vec<String> = ["x", "y", "z"][..field.domain.dim].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=field.stride()).map(|a| format!("q{a}")));
    cols.push("W".into());
    cols.push("flag".into());
    cols.join(",")
}

/// One row per active node; `flag` is 1 where `W` exceeds the default singular threshold.
pub fn csv_string(field: &TensorField) -> String {
    let threshold = field_threshold(field);
    let mut out = csv_header(field);
    out.push('\n');
    for o in 0..field.n_nodes() {
        let p = field.domain.active_position(o);
        for x in &p[..field.domain.dim] {
            write!(out, "{x},").unwrap();
        }
        for q in field.node(o) {
            write!(out, "{q},").unwrap();
        }
        let w = field.potential(o);
        writeln!(out, "{w},{}", (w > threshold) as u8).unwrap();
    }
    out
}

pub fn write_csv(path: &Path, field: &TensorField) -> Result<()> {
    std::fs::write(path, csv_string(field))?;
    Ok(())
}

/// Loads tensor values from CSV text into `field`, whose grid must match the export.
pub fn read_csv_str(text: &str, field: &mut TensorField) -> Result<()> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
    if header.trim() != csv_header(field) {
        return Err(Error::Format(format!("unexpected CSV header {header:?}")));
    }
    let dim = field.domain.dim;
    let stride = field.stride();
    let mut count = 0;
    for (o, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        if o >= field.n_nodes() {
            return Err(Error::Format("more rows than active nodes".into()));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim + stride + 2 {
            return Err(Error::Format(format!("row {} has {} columns", o + 1, cells.len())));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("row {}: {e}", o + 1)));
        let p = field.domain.active_position(o);
        for k in 0..dim {
            if num(cells[k])? != p[k] {
                return Err(Error::Format(format!("row {} is not at node position {:?}", o + 1, &p[..dim])));
            }
        }
        for a in 0..stride {
            field.node_mut(o)[a] = num(cells[dim + a])?;
        }
        count += 1;
    }
    if count != field.n_nodes() {
        return Err(Error::Format(format!("CSV has {count} rows, field has {} nodes", field.n_nodes())));
    }
    Ok(())
}

pub fn read_csv(path: &Path, field: &mut TensorField) -> Result<()> {
    read_csv_str(&std::fs::read_to_string(path)?, field)
}

/// Frame vectors of an active node, or `None` at singular or unrecoverable nodes.
pub fn node_frame(field: &TensorField, o: usize, threshold: f64) -> Option<Vec<Vector3<f64>>> {
    if field.potential(o) > threshold {
        return None;
    }
    match field.target {
        Target::Tetra => recover_tetrahedron(&field.tensor3(o).ok()?, FIELD_RECOVERY_TOL).ok().map(|r| r.frame.vectors3()),
        Target::Mb => {
            let theta = mb_angle(&field.tensor2(o).ok()?);
            Some((0..3).map(|k| {
                let a = theta + k as f64 * std::f64::consts::TAU / 3.0;
                Vector3::new(a.cos(), a.sin(), 0.0)
            }).collect())
        }
    }
}

/// Legacy ASCII VTK over the bounding box of the active nodes. Inactive and
/// singular points carry zero frame vectors; inactive points carry `W = 0`.
pub fn vtk_string(field: &TensorField) -> String {
    let d = &field.domain;
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for &g in &d.active {
        let c = d.coords(g);
        for k in 0..3 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    if d.active.is_empty() {
        lo = [0; 3];
    }
    let n: [usize; 3] = std::array::from_fn(|k| hi[k] + 1 - lo[k]);
    let total = n[0] * n[1] * n[2];
    let threshold = field_threshold(field);
    let n_vec = match field.target {
        Target::Tetra => 4,
        Target::Mb => 3,
    };
    let mut w = vec![0.0; total];
    let mut vecs = vec![[0.0f64; 3]; total * n_vec];
    let mut pt = 0;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let o = d.ordinal[d.index([x, y, z])];
                if o != NONE {
                    let o = o as usize;
                    w[pt] = field.potential(o);
                    if let Some(fr) = node_frame(field, o, threshold) {
                        for (l, v) in fr.iter().enumerate().take(n_vec) {
                            vecs[l * total + pt] = [v[0], v[1], v[2]];
                        }
                    }
                }
                pt += 1;
            }
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("tetraframe field\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET STRUCTURED_POINTS\n");
    writeln!(s, "DIMENSIONS {} {} {}", n[0], n[1], n[2]).unwrap();
    let origin: Vec<f64> = (0..3).map(|k| (d.origin[k] + lo[k] as i64) as f64 * d.h).collect();
    writeln!(s, "ORIGIN {} {} {}", origin[0], origin[1], origin[2]).unwrap();
    let sz = if d.dim == 3 { d.h } else { 1.0 };
    writeln!(s, "SPACING {} {} {}", d.h, d.h, sz).unwrap();
    writeln!(s, "POINT_DATA {total}").unwrap();
    s.push_str("SCALARS W double 1\nLOOKUP_TABLE default\n");
    for v in &w {
        writeln!(s, "{v}").unwrap();
    }
    for l in 0..n_vec {
        writeln!(s, "VECTORS v{} double", l + 1).unwrap();
        for v in &vecs[l * total..(l + 1) * total] {
            writeln!(s, "{} {} {}", v[0], v[1], v[2]).unwrap();
        }
    }
    s
}

pub fn write_vtk(path: &Path, field: &TensorField) -> Result<()> {
    std::fs::write(path, vtk_string(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BcMode, FieldParams};
    use crate::grid::{build_domain, Shape};
    use crate::quaternion::UnitQuaternion;
    use crate::seed::{seed_field, SeedSpec};

    #[test]
    fn csv_round_trip_is_bitwise() {
        let d = build_domain(&Shape::Disk { radius: 1.0 }, 0.2).unwrap();
        let f = seed_field(d, Target::Tetra, FieldParams::new(0.1, 0.1, 0.1), BcMode::Weak, &SeedSpec::Zero, &SeedSpec::Zero, 0.7, 11).unwrap();
        let text = csv_string(&f);
        let mut g = TensorField::zeros(f.domain.clone(), f.target, f.params, f.bc_mode).unwrap();
        read_csv_str(&text, &mut g).unwrap();
        assert!(g.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(read_csv_str(&truncated, &mut g).is_err());
    }

    #[test]
    fn vtk_grammar() {
        let d = build_domain(&Shape::Ball { radius: 1.0 }, 0.5).unwrap();
        let spec = SeedSpec::FrameConstant { rotation: UnitQuaternion::ONE };
        let f = seed_field(d, Target::Tetra, FieldParams::new(0.1, 0.1, 0.1), BcMode::Weak, &spec, &spec, 0.0, 0).unwrap();
        let text = vtk_string(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[2], "ASCII");
        assert_eq!(lines[3], "DATASET STRUCTURED_POINTS");
        let dims: Vec<usize> = lines[4].split_whitespace().skip(1).map(|v| v.parse().unwrap()).collect();
        let total: usize = dims.iter().product();
        assert_eq!(lines[7], format!("POINT_DATA {total}"));
        assert_eq!(lines[8], "SCALARS W double 1");
        assert_eq!(lines[9], "LOOKUP_TABLE default");
        let mut at = 10 + total;
        for l in 1..=4 {
            assert_eq!(lines[at], format!("VECTORS v{l} double"));
            assert!(lines[at + 1..at + 1 + total].iter().all(|r| r.split_whitespace().count() == 3));
            at += 1 + total;
        }
        assert_eq!(at, lines.len());
    }
}
