//! Pointwise recovery of frames from tensors on (or near) the variety.
//!
//! In 2D the frame angle is one third of the phase of `(q1, q2)`. In 3D the
//! four frame vectors are the maximizers over `S²` of
//! `μ_Q(b) = det(Σ_j b_j Q_j) = (1/3) Σ c_ijk b_i b_j b_k`, with `c_ijk = tr(Q_iQ_jQ_k)`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{invalid, Error, Result};
use crate::frames::Frame;
use crate::tensor::{TracelessSymTensor2, TracelessSymTensor3, LAMBDA2_SQ, LAMBDA3_SQ};

/// Default variety-membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Angular radius under which two maximizers are treated as the same vector.
const DEDUP_ANGLE: f64 = 0.1;

/// Recovered frame plus diagnostics.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub frame: Frame,
    /// `‖gram(Q) − λ²I‖_F` of the input tensor.
    pub residual: f64,
    /// `μ_Q` at each recovered vector (empty in 2D).
    pub maximizer_values: Vec<f64>,
}

/// Mercedes-Benz frame of a 2D tensor; first vector at `θ = arg(q1,q2)/3 ∈ [0, 2π/3)`.
pub fn recover_mb(q: &TracelessSymTensor2, tol: f64) -> Result<RecoveryResult> {
    let residual = (q.gram() - nalgebra::Matrix2::identity() * LAMBDA2_SQ).norm();
    if residual > tol {
        return Err(Error::OffVariety { residual, tol });
    }
    let theta = q.phase().rem_euclid(std::f64::consts::TAU) / 3.0;
    Ok(RecoveryResult { frame: Frame::mercedes(theta), residual, maximizer_values: Vec::new() })
}

/// Angle of the first recovered 2D frame vector.
pub fn mb_angle(q: &TracelessSymTensor2) -> f64 {
    q.phase().rem_euclid(std::f64::consts::TAU) / 3.0
}

/// The symmetric cubic form `c_ijk = tr(Q_iQ_jQ_k)`.
#[derive(Clone, Copy, Debug)]
pub struct CubicForm {
    pub c: [[[f64; 3]; 3]; 3],
}

impl CubicForm {
    pub fn new(q: &TracelessSymTensor3) -> Self {
        let b = q.blocks();
        let mut c = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let bij = b[i] * b[j];
                for k in 0..3 {
                    c[i][j][k] = bij.dot(&b[k].transpose());
                }
            }
        }
        Self { c }
    }

    /// `μ(b) = (1/3) Σ c_ijk b_i b_j b_k`.
    pub fn value(&self, b: &Vector3<f64>) -> f64 {
        b.dot(&self.gradient(b)) / 3.0
    }

    /// `∇μ(b)_i = Σ_jk c_ijk b_j b_k`.
    pub fn gradient(&self, b: &Vector3<f64>) -> Vector3<f64> {
        let h = self.hessian(b);
        h * b * 0.5
    }

    /// `∇²μ(b)_ij = 2 Σ_k c_ijk b_k`.
    pub fn hessian(&self, b: &Vector3<f64>) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| 2.0 * (0..3).map(|k| self.c[i][j][k] * b[k]).sum::<f64>())
    }
}

/// `μ_Q(b) = det(Σ_j b_j Q_j)`.
pub fn mu(q: &TracelessSymTensor3, b: &Vector3<f64>) -> Result<f64> {
    if (b.norm() - 1.0).abs() > 1e-12 {
        return invalid(format!("expected a unit vector, got norm {}", b.norm()));
    }
    Ok(q.contract_vec(b).determinant())
}

/// Gauss-Newton projection toward `gram(Q) = 32/27 I` with truncated minimum-norm steps.
pub fn project_to_variety(q: &TracelessSymTensor3, steps: usize) -> TracelessSymTensor3 {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let views = crate::tensor::basis3_views();
    let mut cur = *q;
    for _ in 0..steps {
        let v = cur.matrix_view();
        let g = v * v.transpose() - Matrix3::identity() * LAMBDA3_SQ;
        if g.norm() < 1e-15 {
            break;
        }
        let f = SMatrix::<f64, 6, 1>::from_fn(|r, _| g[PAIRS[r]]);
        let jac = SMatrix::<f64, 6, 7>::from_fn(|r, a| {
            let m = views[a] * v.transpose();
            let (i, j) = PAIRS[r];
            m[(i, j)] + m[(j, i)]
        });
        // The map has rank 4 on the variety; drop the near-null directions.
        let svd = jac.svd(true, true);
        let cutoff = 1e-4 * svd.singular_values.max();
        let Ok(step) = svd.solve(&f, cutoff) else { break };
        let next = TracelessSymTensor3::from_vector(&(cur.to_vector() - step));
        if next.variety_residual() >= cur.variety_residual() {
            break;
        }
        cur = next;
    }
    cur
}

/// Seed directions: the 12 icosahedron vertices and the 20 dodecahedron vertices.
fn seed_directions() -> Vec<Vector3<f64>> {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let ip = 1.0 / p;
    let mut out = Vec::with_capacity(32);
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            out.push(Vector3::new(0.0, s1, s2 * p));
            out.push(Vector3::new(s1, s2 * p, 0.0));
            out.push(Vector3::new(s2 * p, 0.0, s1));
            out.push(Vector3::new(0.0, s1 * ip, s2 * p));
            out.push(Vector3::new(s1 * ip, s2 * p, 0.0));
            out.push(Vector3::new(s2 * p, 0.0, s1 * ip));
            for s3 in [-1.0, 1.0] {
                out.push(Vector3::new(s1, s2, s3));
            }
        }
    }
    out.into_iter().map(|v| v.normalize()).collect()
}

/// Projected Newton ascent of `μ` on `S²`; falls back to gradient steps when
/// the Riemannian Hessian is not negative definite.
fn ascend(form: &CubicForm, start: Vector3<f64>) -> Vector3<f64> {
    let mut b = start;
    let mut step_len = 0.5;
    for _ in 0..200 {
        let g = form.gradient(&b);
        let lam = b.dot(&g);
        let gt = g - b * lam;
        if gt.norm() < 1e-13 {
            break;
        }
        let p = Matrix3::identity() - b * b.transpose();
        let hr = p * form.hessian(&b) * p - p * lam;
        // Restrict to the tangent plane via an orthonormal basis.
        let (t1, t2) = crate::tensor::tangent_basis(&b);
        let h2 = nalgebra::Matrix2::new(t1.dot(&(hr * t1)), t1.dot(&(hr * t2)), t2.dot(&(hr * t1)), t2.dot(&(hr * t2)));
        let g2 = nalgebra::Vector2::new(t1.dot(&gt), t2.dot(&gt));
        let eig = h2.symmetric_eigen();
        let newton = if eig.eigenvalues.max() < -1e-10 { h2.lu().solve(&(-g2)) } else { None };
        let dir = match newton {
            Some(s) => t1 * s[0] + t2 * s[1],
            None => {
                // gradient step with backtracking on μ
                let mut t = step_len;
                let f0 = form.value(&b);
                loop {
                    let cand = (b + gt * t).normalize();
                    if form.value(&cand) > f0 || t < 1e-12 {
                        step_len = (t * 2.0).min(1.0);
                        break gt * t;
                    }
                    t *= 0.5;
                }
            }
        };
        b = (b + dir).normalize();
    }
    b
}

/// Critical-point diagnostics of `μ_Q` at `b`.
#[derive(Clone, Copy, Debug)]
pub struct CriticalDiagnostics {
    /// `γ = ⟨b, η(b)b⟩` where `η(b) = Σ_j b_j Q_j`.
    pub gamma: f64,
    /// `|η(b)b − γb|`.
    pub eigen_residual: f64,
    /// Lagrange multiplier `λ = ⟨b, ∇μ(b)⟩`.
    pub lagrange_multiplier: f64,
    /// `|∇μ(b) − λb|`.
    pub lagrange_residual: f64,
    /// `|γ − 2λ/α|` with `α = 32/27`.
    pub ratio_residual: f64,
}

pub fn validate_critical_structure(q: &TracelessSymTensor3, b: &Vector3<f64>) -> CriticalDiagnostics {
    let eta_b = q.contract_vec(b) * b;
    let gamma = b.dot(&eta_b);
    let form = CubicForm::new(q);
    let g = form.gradient(b);
    let lam = b.dot(&g);
    CriticalDiagnostics {
        gamma,
        eigen_residual: (eta_b - b * gamma).norm(),
        lagrange_multiplier: lam,
        lagrange_residual: (g - b * lam).norm(),
        ratio_residual: (gamma - 2.0 * lam / LAMBDA3_SQ).abs(),
    }
}

fn variety_check(q: &TracelessSymTensor3, tol: f64) -> Result<(f64, TracelessSymTensor3)> {
    let residual = q.variety_residual();
    if residual > tol {
        return Err(Error::OffVariety { residual, tol });
    }
    let target = if residual > 1e-13 { project_to_variety(q, 5) } else { *q };
    Ok((residual, target))
}

/// Tetrahedral frame of a 3D tensor as the four maximizers of `μ_Q` over `S²`.
pub fn recover_tetrahedron(q: &TracelessSymTensor3, tol: f64) -> Result<RecoveryResult> {
    let (residual, target) = variety_check(q, tol)?;
    let form = CubicForm::new(&target);
    let mut found: Vec<(Vector3<f64>, f64)> = Vec::new();
    for seed in seed_directions() {
        let b = ascend(&form, seed);
        let val = form.value(&b);
        if val <= 0.0 {
            continue;
        }
        if found.iter().all(|(c, _)| c.angle(&b) > DEDUP_ANGLE) {
            found.push((b, val));
        }
    }
    found.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    if found.len() < 4 {
        return Err(Error::Recovery(format!("found {} distinct maximizers, expected 4", found.len())));
    }
    found.truncate(4);
    let vectors: Vec<Vec<f64>> = found.iter().map(|(b, _)| b.iter().copied().collect()).collect();
    let frame = Frame::from_vectors_unchecked(vectors);
    let frame_err = frame.invariant_residual();
    if frame_err > tol.max(1e-8) {
        return Err(Error::Recovery(format!("maximizers violate frame relations by {frame_err:.3e}")));
    }
    Ok(RecoveryResult { frame, residual, maximizer_values: found.iter().map(|(_, v)| *v).collect() })
}

/// Constructive recovery: align one critical point with `e¹` and reduce the
/// tangential part to a 2D Mercedes-Benz recovery.
pub fn recover_tetrahedron_constructive(q: &TracelessSymTensor3, tol: f64) -> Result<RecoveryResult> {
    let (residual, target) = variety_check(q, tol)?;
    let form = CubicForm::new(&target);
    let b = ascend(&form, Vector3::new(1.0, 0.7, 0.3).normalize());
    let b = if form.value(&b) < 0.0 { -b } else { b };
    let (t1, t2) = crate::tensor::tangent_basis(&b);
    // Rows b, t1, t2 map b to e¹.
    let r = Matrix3::from_rows(&[b.transpose(), t1.transpose(), t2.transpose()]);
    let tilde = target.rotate(&r);
    let full = tilde.full();
    let (c, d) = (full[1][1][1], full[1][1][2]);
    let theta = d.atan2(c).rem_euclid(std::f64::consts::TAU) / 3.0;
    let s = 2.0 * 2f64.sqrt() / 3.0;
    let mut local = vec![Vector3::x()];
    for j in 0..3 {
        let phi = theta + std::f64::consts::TAU * j as f64 / 3.0;
        local.push(Vector3::new(-1.0 / 3.0, s * phi.cos(), s * phi.sin()));
    }
    let rt = r.transpose();
    let vectors: Vec<Vec<f64>> = local.iter().map(|a| (rt * a).iter().copied().collect()).collect();
    let frame = Frame::from_vectors_unchecked(vectors);
    let values = frame.vectors3().iter().map(|v| form.value(v)).collect();
    Ok(RecoveryResult { frame, residual, maximizer_values: values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{frame_from_rotation, random_rotation, tensor3_from_frame};
    use nalgebra::DMatrix;

    fn to3(r: &DMatrix<f64>) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| r[(i, j)])
    }

    #[test]
    fn mb_examples() {
        let r = recover_mb(&TracelessSymTensor2::new([0.75, 0.0]), DEFAULT_TOL).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let expect = Frame::from_vectors_unchecked(vec![vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]]);
        assert!(r.frame.set_distance(&expect) < 1e-15);
        let th = mb_angle(&TracelessSymTensor2::new([0.0, 0.75]));
        assert!((th - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert!(recover_mb(&TracelessSymTensor2::new([0.5, 0.0]), DEFAULT_TOL).is_err());
    }

    #[test]
    fn mb_round_trip() {
        let period = std::f64::consts::TAU / 3.0;
        for k in 0..1000 {
            let th = 0.0123 + k as f64 * 0.0371;
            let q = TracelessSymTensor2::from_angle(th);
            let out = mb_angle(&q);
            let d = (out - th).rem_euclid(period);
            assert!(d.min(period - d) < 1e-12);
        }
    }

    #[test]
    fn mu_on_standard_tetrahedron() {
        let q = tensor3_from_frame(&Frame::standard_tetrahedron()).unwrap();
        let b = Vector3::new(1.0, 1.0, 1.0).normalize();
        assert!((mu(&q, &b).unwrap() - 128.0 / 729.0).abs() < 1e-15);
        assert!(mu(&q, &Vector3::x()).unwrap().abs() < 1e-15);
        let form = CubicForm::new(&q);
        let r = Vector3::new(0.3, -0.5, 0.8).normalize();
        assert!((form.value(&r) - mu(&q, &r).unwrap()).abs() < 1e-15);
        assert!((mu(&q, &-r).unwrap() + mu(&q, &r).unwrap()).abs() < 1e-15);
        assert!(mu(&q, &Vector3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn recover_standard_tetrahedron() {
        let f = Frame::standard_tetrahedron();
        let q = tensor3_from_frame(&f).unwrap();
        let r = recover_tetrahedron(&q, DEFAULT_TOL).unwrap();
        assert!(r.frame.set_distance(&f) < 1e-12);
        for v in &r.maximizer_values {
            assert!((v - 128.0 / 729.0).abs() < 1e-13);
        }
    }

    #[test]
    fn recover_random_frames() {
        for seed in 0..100 {
            let rot = random_rotation(3, 1000 + seed);
            let f = frame_from_rotation(&rot, 3).unwrap();
            let q = tensor3_from_frame(&f).unwrap();
            for res in [recover_tetrahedron(&q, DEFAULT_TOL).unwrap(), recover_tetrahedron_constructive(&q, DEFAULT_TOL).unwrap()] {
                assert!(res.frame.set_distance(&f) < 1e-8, "seed {seed}");
                let back = tensor3_from_frame(&res.frame).unwrap();
                assert!((back.to_vector() - q.to_vector()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn recovery_is_rotation_equivariant() {
        let q = tensor3_from_frame(&Frame::vertical_tetrahedron()).unwrap();
        let base = recover_tetrahedron(&q, DEFAULT_TOL).unwrap().frame;
        for seed in 0..20 {
            let rot = random_rotation(3, 2000 + seed);
            let rq = q.rotate(&to3(&rot));
            let rec = recover_tetrahedron(&rq, DEFAULT_TOL).unwrap().frame;
            assert!(rec.set_distance(&base.rotated(&rot)) < 1e-8);
        }
    }

    #[test]
    fn near_variety_inputs_are_projected() {
        let f = frame_from_rotation(&random_rotation(3, 7), 3).unwrap();
        let q = tensor3_from_frame(&f).unwrap();
        let mut noisy = q;
        noisy.q[2] += 1e-7;
        let r = recover_tetrahedron(&noisy, DEFAULT_TOL).unwrap();
        assert!(r.residual > 0.0);
        assert!(r.frame.set_distance(&f) < 1e-6);
        let far = q * 1.5;
        assert!(matches!(recover_tetrahedron(&far, DEFAULT_TOL), Err(Error::OffVariety { .. })));
    }

    #[test]
    fn critical_structure() {
        let q = tensor3_from_frame(&Frame::standard_tetrahedron()).unwrap();
        let b = Vector3::new(1.0, 1.0, 1.0).normalize();
        let d = validate_critical_structure(&q, &b);
        assert!((d.gamma - 8.0 / 9.0).abs() < 1e-14);
        assert!(d.eigen_residual < 1e-14 && d.lagrange_residual < 1e-14 && d.ratio_residual < 1e-14);
        let off = validate_critical_structure(&q, &Vector3::new(0.3, 0.4, 0.5).normalize());
        assert!(off.lagrange_residual > 1e-3);
        for seed in 0..20 {
            let f = frame_from_rotation(&random_rotation(3, 3000 + seed), 3).unwrap();
            let q = tensor3_from_frame(&f).unwrap();
            for v in recover_tetrahedron(&q, DEFAULT_TOL).unwrap().frame.vectors3() {
                let d = validate_critical_structure(&q, &v);
                assert!(d.eigen_residual < 1e-8 && d.lagrange_residual < 1e-8 && d.ratio_residual < 1e-8);
            }
        }
    }

    #[test]
    fn projection_reduces_residual() {
        let f = frame_from_rotation(&random_rotation(3, 9), 3).unwrap();
        let mut q = tensor3_from_frame(&f).unwrap();
        q.q[0] += 1e-3;
        q.q[5] -= 2e-3;
        let p = project_to_variety(&q, 5);
        assert!(p.variety_residual() < 1e-12, "{}", p.variety_residual());
    }
}
