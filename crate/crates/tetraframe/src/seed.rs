//! Initial and boundary data for tensor fields.

use nalgebra::{Complex, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::field::{BcMode, FieldParams, Target, TensorField};
use crate::frames::tensor3_from_vectors;
use crate::grid::{GridDomain, Shape};
use crate::quaternion::{multi_defect_field_clamped, tetra_tensor, Defect, UnitQuaternion};
use crate::tensor::{dirichlet_bc_from_normal, TracelessSymTensor2};

/// Nodewise evaluation rule for a field.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedSpec {
    /// The zero tensor.
    Zero,
    /// The smooth escape map of the unit disk (planar domains) or the map of the
    /// unit ball with a single boundary singularity at the north pole.
    EscapeMap,
    /// `T(Π_j F_{α_j,β_j}(μ_{a_j}(z)))` on a disk, `z` scaled to the unit disk.
    QuaternionBoundary { defects: Vec<Defect>, rho: f64 },
    /// Constant tetrahedral tensor `T(q)`.
    FrameConstant { rotation: UnitQuaternion },
    /// Constant Mercedes-Benz tensor with first vector at `angle`.
    MbConstant { angle: f64 },
    /// Tensor aligned with the outward normal (boundary nodes only): the
    /// Mercedes-Benz frame containing `ν`, or the tetrahedral boundary tensor
    /// with optional tangential phase.
    Normal { theta: Option<f64> },
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn tetra_from_axes(a1: Vector3<f64>, f: Vector3<f64>, g: Vector3<f64>) -> [Vector3<f64>; 4] {
    let s6 = 6f64.sqrt();
    [
        a1,
        -a1 / 3.0 + f * (2.0 * SQRT2 / 3.0),
        -a1 / 3.0 - f * (SQRT2 / 3.0) + g * (s6 / 3.0),
        -a1 / 3.0 - f * (SQRT2 / 3.0) - g * (s6 / 3.0),
    ]
}

/// Escape-map frame of the unit disk at `(x, y)` (radius clamped to 1).
///
/// The distinguished vector is `f³ = sin(πr/2) e_r + cos(πr/2) e³`, equal to
/// `e³` at the centre and to the outward normal on the circle; the other three
/// vectors are built on `(f¹, f²)`.
pub fn escape_frame_2d(x: f64, y: f64) -> [Vector3<f64>; 4] {
    let r = x.hypot(y).min(1.0);
    let th = y.atan2(x);
    let (st, ct) = th.sin_cos();
    let (s, c) = (r * std::f64::consts::FRAC_PI_2).sin_cos();
    let er = Vector3::new(ct, st, 0.0);
    let et = Vector3::new(-st, ct, 0.0);
    let e3 = Vector3::z();
    let f1 = (er * c - e3 * s) * ct - et * st;
    let f2 = (er * c - e3 * s) * st + et * ct;
    let f3 = er * s + e3 * c;
    tetra_from_axes(f3, f1, f2)
}

/// Frame of the unit-ball map whose first vector equals the position on the
/// unit sphere, singular only at the north pole.
pub fn escape_frame_3d(p: &[f64; 3]) -> [Vector3<f64>; 4] {
    let (x1, x2) = (p[0], p[1]);
    let mut w = 1.0 - p[2];
    if x1 * x1 + x2 * x2 + w * w < 1e-24 {
        w = 1e-12;
    }
    let d = x1 * x1 + x2 * x2 + w * w;
    let f1 = Vector3::new(2.0 * x1 * w, 2.0 * x2 * w, x1 * x1 + x2 * x2 - w * w) / d;
    let f2 = Vector3::new(-x1 * x1 + x2 * x2 + w * w, -2.0 * x1 * x2, 2.0 * x1 * w) / d;
    let f3 = Vector3::new(2.0 * x1 * x2, -(x1 * x1 - x2 * x2 + w * w), -2.0 * x2 * w) / d;
    tetra_from_axes(f1, f2, f3)
}

fn disk_radius(shape: &Shape) -> Result<f64> {
    match shape {
        Shape::Disk { radius } => Ok(*radius),
        _ => invalid("this seed is defined on a disk domain"),
    }
}

/// Value of `spec` at active node `ord`.
pub fn seed_value(domain: &GridDomain, target: Target, spec: &SeedSpec, ord: usize) -> Result<Vec<f64>> {
    let p = domain.active_position(ord);
    let tetra_only = || if target == Target::Tetra { Ok(()) } else { invalid("seed produces tetrahedral tensors") };
    match spec {
        SeedSpec::Zero => Ok(vec![0.0; target.stride()]),
        SeedSpec::EscapeMap => {
            tetra_only()?;
            let frame = match &domain.shape {
                Shape::Disk { radius } => escape_frame_2d(p[0] / radius, p[1] / radius),
                Shape::Ball { radius } => {
                    let mut x = p.map(|v| v / radius);
                    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                    if n > 1.0 {
                        x = x.map(|v| v / n);
                    }
                    escape_frame_3d(&x)
                }
                _ => return invalid("escape map is defined on the unit disk or ball"),
            };
            Ok(tensor3_from_vectors(&frame).q.to_vec())
        }
        SeedSpec::QuaternionBoundary { defects, rho } => {
            tetra_only()?;
            let r = disk_radius(&domain.shape)?;
            let mut z = Complex::new(p[0] / r, p[1] / r);
            if z.norm() > 1.0 {
                z /= z.norm();
            }
            Ok(tetra_tensor(&multi_defect_field_clamped(defects, *rho, z)?).q.to_vec())
        }
        SeedSpec::FrameConstant { rotation } => {
            tetra_only()?;
            let q = UnitQuaternion::normalized(rotation.a, rotation.b, rotation.c, rotation.d);
            Ok(tetra_tensor(&q).q.to_vec())
        }
        SeedSpec::MbConstant { angle } => match target {
            Target::Mb => Ok(TracelessSymTensor2::from_angle(*angle).q.to_vec()),
            Target::Tetra => invalid("Mercedes-Benz seed on a tetrahedral field"),
        },
        SeedSpec::Normal { theta } => {
            if !domain.is_boundary(ord) {
                return invalid("normal-aligned data is defined on boundary nodes only");
            }
            let nu = domain.normals[ord];
            match target {
                Target::Mb => Ok(TracelessSymTensor2::from_angle(nu[1].atan2(nu[0])).q.to_vec()),
                Target::Tetra => Ok(dirichlet_bc_from_normal(&Vector3::from(nu), *theta)?.q.to_vec()),
            }
        }
    }
}

/// Initial field: `init` on free nodes (plus uniform noise of amplitude
/// `noise` drawn from a seeded stream), `boundary` on strong boundary nodes.
#[allow(clippy::too_many_arguments)]
pub fn seed_field(
    domain: GridDomain,
    target: Target,
    params: FieldParams,
    bc_mode: BcMode,
    init: &SeedSpec,
    boundary: &SeedSpec,
    noise: f64,
    seed: u64,
) -> Result<TensorField> {
    let mut field = TensorField::zeros(domain, target, params, bc_mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for ord in 0..field.n_nodes() {
        let fixed = field.fixed[ord];
        let v = seed_value(&field.domain, target, if fixed { boundary } else { init }, ord)?;
        let slot = field.node_mut(ord);
        slot.copy_from_slice(&v);
        if !fixed && noise > 0.0 {
            for x in slot.iter_mut() {
                *x += rng.gen_range(-noise..noise);
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_domain;
    use crate::tensor::TracelessSymTensor3;

    fn check_frame(f: &[Vector3<f64>; 4]) {
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { -1.0 / 3.0 };
                assert!((f[i].dot(&f[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn escape_2d_endpoints() {
        let f = escape_frame_2d(0.0, 0.0);
        check_frame(&f);
        assert!(f.iter().any(|v| (v - Vector3::z()).norm() < 1e-14));
        for k in 0..12 {
            let th = k as f64 * 0.5;
            let f = escape_frame_2d(th.cos(), th.sin());
            check_frame(&f);
            let nu = Vector3::new(th.cos(), th.sin(), 0.0);
            assert!((f[0] - nu).norm() < 1e-14);
            let q = tensor3_from_vectors(&f);
            assert!(q.boundary_v(&nu).unwrap() < 1e-28);
        }
        let g = escape_frame_2d(0.3, -0.4);
        check_frame(&g);
    }

    #[test]
    fn escape_3d_properties() {
        for p in [[0.1, 0.2, 0.3], [0.0, 0.0, 0.0], [-0.5, 0.1, -0.7]] {
            check_frame(&escape_frame_3d(&p));
        }
        for k in 0..20 {
            let th = 0.3 + k as f64 * 0.13;
            let ph = k as f64 * 0.7;
            let x = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let f = escape_frame_3d(&x);
            assert!((f[0] - Vector3::from(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn seeds_on_disk() {
        let d = build_domain(&Shape::Disk { radius: 1.0 }, 1.0 / 16.0).unwrap();
        let params = FieldParams::new(0.1, 0.1, 0.1);
        let zero = seed_field(d.clone(), Target::Tetra, params, BcMode::Weak, &SeedSpec::Zero, &SeedSpec::Zero, 0.0, 1).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
        let esc =
            seed_field(d.clone(), Target::Tetra, params, BcMode::Strong, &SeedSpec::EscapeMap, &SeedSpec::EscapeMap, 0.0, 1).unwrap();
        assert!(esc.max_potential() < 1e-24);
        let mb = seed_field(d.clone(), Target::Mb, params, BcMode::Strong, &SeedSpec::Zero, &SeedSpec::Normal { theta: None }, 0.0, 1)
            .unwrap();
        for &b in &d.boundary {
            let b = b as usize;
            let nu = d.normals[b];
            let v = mb.tensor2(b).unwrap().boundary_v(&nalgebra::Vector2::new(nu[0], nu[1])).unwrap();
            assert!(v < 1e-28);
        }
        assert!(seed_value(&d, Target::Tetra, &SeedSpec::Normal { theta: None }, 0).is_ok() == d.is_boundary(0));
        let noisy = seed_field(d.clone(), Target::Mb, params, BcMode::Weak, &SeedSpec::Zero, &SeedSpec::Zero, 1e-3, 7).unwrap();
        let again = seed_field(d, Target::Mb, params, BcMode::Weak, &SeedSpec::Zero, &SeedSpec::Zero, 1e-3, 7).unwrap();
        assert_eq!(noisy.values, again.values);
        assert!(noisy.values.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn mismatched_specs() {
        let ball = build_domain(&Shape::Ball { radius: 1.0 }, 0.25).unwrap();
        let spec = SeedSpec::QuaternionBoundary { defects: vec![], rho: 0.1 };
        assert!(seed_value(&ball, Target::Tetra, &spec, 0).is_err());
        let disk = build_domain(&Shape::Disk { radius: 1.0 }, 0.25).unwrap();
        assert!(seed_value(&disk, Target::Mb, &SeedSpec::EscapeMap, 0).is_err());
        let c = seed_value(&ball, Target::Tetra, &SeedSpec::FrameConstant { rotation: UnitQuaternion::ONE }, 3).unwrap();
        let t = TracelessSymTensor3::new(std::array::from_fn(|a| c[a]));
        assert!(t.variety_residual() < 1e-14);
    }
}
