//! Quartic bent-core potential
//! `W(Q) = |Q|⁴/4 − (α/2)|Q|² + (β/4)|QQᵀ|²` on `H_trace(3,3)`.
//!
//! With `λ_j` the eigenvalues of `QQᵀ` the potential reduces to
//! `ω(λ) = ¼(Σλ)² − (α/2)Σλ + (β/4)Σλ²`. The minimizer is classified in closed
//! form and confirmed by a multistart quasi-Newton descent over the seven
//! tensor coordinates.

use std::fmt;

use nalgebra::SVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::tensor::{basis3_views, metric3, TracelessSymTensor3};

type Vector7 = SVector<f64, 7>;

/// Lower end of the interval where the rank-2 state is the minimizer.
pub const BETA_RANK2: f64 = -29.0 / 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimizerKind {
    Zero,
    /// `λ₁ = λ₂ = λ₃`: tetrahedral frames.
    Tetrahedral,
    /// One `λ` vanishes: Mercedes-Benz frames.
    Rank2,
    /// `β = 0`, `α > 0`: every tensor with `|Q|² = α`.
    Sphere,
    Unbounded,
}

impl fmt::Display for MinimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Tetrahedral => "tetrahedral",
            Self::Rank2 => "rank-2",
            Self::Sphere => "sphere",
            Self::Unbounded => "unbounded",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BentCoreParams {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct BentCoreReport {
    pub params: BentCoreParams,
    pub kind: MinimizerKind,
    /// A minimizing `λ` triple (for the sphere, its tetrahedral member); `None` when unbounded.
    pub lambdas: Option<[f64; 3]>,
    /// Closed-form minimum, `−∞` when unbounded.
    pub omega: f64,
    /// Best value of the numerical descent (not run when unbounded).
    pub numerical_omega: Option<f64>,
    /// Whether the realizability inequalities hold at `lambdas`.
    pub restr_ok: bool,
}

impl BentCoreReport {
    /// Relative gap between the numerical and the closed-form minimum.
    pub fn relative_gap(&self) -> Option<f64> {
        self.numerical_omega.map(|n| (n - self.omega).abs() / self.omega.abs().max(1e-300).max(f64::MIN_POSITIVE))
    }
}

/// `ω(λ)`; errors on negative `λ`.
pub fn bentcore_omega(lambda: [f64; 3], alpha: f64, beta: f64) -> Result<f64> {
    if lambda.iter().any(|l| *l < 0.0 || !l.is_finite()) {
        return invalid(format!("eigenvalues of QQᵀ must be non-negative, got {lambda:?}"));
    }
    let s: f64 = lambda.iter().sum();
    let s2: f64 = lambda.iter().map(|l| l * l).sum();
    Ok(0.25 * s * s - 0.5 * alpha * s + 0.25 * beta * s2)
}

/// `W(Q)` evaluated on the tensor.
pub fn bentcore_w(q: &TracelessSymTensor3, alpha: f64, beta: f64) -> f64 {
    w_and_grad(&q.to_vector(), alpha, beta).0
}

fn w_and_grad(x: &Vector7, alpha: f64, beta: f64) -> (f64, Vector7) {
    let q = TracelessSymTensor3::from_vector(x);
    let v = q.matrix_view();
    let g = v * v.transpose();
    let n2 = v.norm_squared();
    let w = 0.25 * n2 * n2 - 0.5 * alpha * n2 + 0.25 * beta * g.norm_squared();
    let dn2 = metric3() * x * 2.0;
    let gv = g * v;
    let dg2 = Vector7::from_fn(|a, _| 4.0 * gv.dot(&basis3_views()[a]));
    (w, dn2 * (0.5 * n2 - 0.5 * alpha) + dg2 * (0.25 * beta))
}

/// Whether `λ` satisfies the three realizability inequalities
/// `¼(λ_i − λ_j)² ≤ λ_k(λ_i + λ_j − 2λ_k/3)` up to `tol`.
pub fn restr_lambdas_hold(l: [f64; 3], tol: f64) -> bool {
    (0..3).all(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        0.25 * (l[i] - l[j]).powi(2) <= l[k] * (l[i] + l[j] - 2.0 * l[k] / 3.0) + tol
    })
}

/// Closed-form classification of the global minimizer.
pub fn classify(alpha: f64, beta: f64) -> (MinimizerKind, Option<[f64; 3]>, f64) {
    if beta <= -2.0 {
        return (MinimizerKind::Unbounded, None, f64::NEG_INFINITY);
    }
    if alpha <= 0.0 {
        return (MinimizerKind::Zero, Some([0.0; 3]), 0.0);
    }
    if beta == 0.0 {
        let l = alpha / 3.0;
        return (MinimizerKind::Sphere, Some([l; 3]), -alpha * alpha / 4.0);
    }
    if beta > 0.0 {
        let l = alpha / (3.0 + beta);
        (MinimizerKind::Tetrahedral, Some([l; 3]), -3.0 * alpha * alpha / (4.0 * (3.0 + beta)))
    } else {
        let l = alpha / (2.0 + beta);
        (MinimizerKind::Rank2, Some([l, l, 0.0]), -alpha * alpha / (2.0 * (2.0 + beta)))
    }
}

/// Quasi-Newton descent with Armijo backtracking from `x`.
fn bfgs(mut x: Vector7, alpha: f64, beta: f64) -> (f64, Vector7) {
    let (mut f, mut g) = w_and_grad(&x, alpha, beta);
    let mut h = nalgebra::SMatrix::<f64, 7, 7>::identity() * 0.01;
    for _ in 0..2000 {
        if g.norm() < 1e-13 {
            break;
        }
        let mut p = -(h * g);
        if p.dot(&g) >= 0.0 {
            h = nalgebra::SMatrix::identity() * 0.01;
            p = -(h * g);
        }
        let mut t = 1.0;
        let (mut fx, mut gx, mut xn) = (f, g, x);
        let mut accepted = false;
        for _ in 0..60 {
            xn = x + p * t;
            (fx, gx) = w_and_grad(&xn, alpha, beta);
            if fx <= f + 1e-4 * t * p.dot(&g) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let s = xn - x;
        let y = gx - g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let i = nalgebra::SMatrix::<f64, 7, 7>::identity();
            h = (i - s * y.transpose() * rho) * h * (i - y * s.transpose() * rho) + s * s.transpose() * rho;
        }
        x = xn;
        f = fx;
        g = gx;
    }
    (f, x)
}

/// Lowest value of `W` found from `starts` random initial tensors.
pub fn numerical_minimum(alpha: f64, beta: f64, starts: usize, seed: u64) -> (f64, TracelessSymTensor3) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = alpha.abs().max(0.1).sqrt();
    let mut best = (f64::INFINITY, Vector7::zeros());
    for _ in 0..starts {
        let x0 = Vector7::from_fn(|_, _| rng.gen_range(-1.0..1.0) * scale);
        let (f, x) = bfgs(x0, alpha, beta);
        if f < best.0 {
            best = (f, x);
        }
    }
    (best.0, TracelessSymTensor3::from_vector(&best.1))
}

/// Number of random starts used by [`bentcore_minimize`].
pub const DEFAULT_STARTS: usize = 12;

pub fn bentcore_minimize(alpha: f64, beta: f64) -> BentCoreReport {
    let (kind, lambdas, omega) = classify(alpha, beta);
    let numerical_omega = (kind != MinimizerKind::Unbounded).then(|| numerical_minimum(alpha, beta, DEFAULT_STARTS, 0x5eed).0);
    let restr_ok = lambdas.is_some_and(|l| restr_lambdas_hold(l, 1e-12));
    BentCoreReport { params: BentCoreParams { alpha, beta }, kind, lambdas, omega, numerical_omega, restr_ok }
}

/// Sorted eigenvalues of `QQᵀ`, descending.
pub fn gram_eigenvalues(q: &TracelessSymTensor3) -> [f64; 3] {
    let mut e: Vec<f64> = q.gram().symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
    e.sort_by(|a, b| b.total_cmp(a));
    [e[0], e[1], e[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{tensor3_from_vectors, Frame};
    use crate::tensor::TracelessSymTensor2;

    #[test]
    fn omega_values() {
        assert_eq!(bentcore_omega([0.0; 3], 1.0, 1.0).unwrap(), 0.0);
        assert!((bentcore_omega([0.25; 3], 1.0, 1.0).unwrap() + 3.0 / 16.0).abs() < 1e-15);
        assert!((bentcore_omega([1.0, 1.0, 0.0], 1.0, -1.0).unwrap() + 0.5).abs() < 1e-15);
        assert!(bentcore_omega([-0.1, 0.0, 0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = Vector7::from_fn(|a, _| 0.3 * (a as f64 + 1.0).sin());
        let (_, g) = w_and_grad(&x, 0.7, -0.4);
        for a in 0..7 {
            let h = 1e-6;
            let mut p = x;
            p[a] += h;
            let mut m = x;
            m[a] -= h;
            let fd = (w_and_grad(&p, 0.7, -0.4).0 - w_and_grad(&m, 0.7, -0.4).0) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-7 * (1.0 + g[a].abs()), "{a}: {fd} vs {}", g[a]);
        }
    }

    #[test]
    fn omega_agrees_with_w_on_frames() {
        // Tetrahedral tensors have QQᵀ ∝ I, planar Mercedes-Benz tensors a rank-2 gram.
        let t = tensor3_from_vectors(&Frame::standard_tetrahedron().vectors3().try_into().unwrap());
        let l = gram_eigenvalues(&t);
        assert!((bentcore_w(&t, 0.8, 0.3) - bentcore_omega(l, 0.8, 0.3).unwrap()).abs() < 1e-13);
        assert!(restr_lambdas_hold(l, 1e-12));
        let mb = TracelessSymTensor2::from_angle(0.3);
        let m = TracelessSymTensor3::new([mb.q[0], mb.q[1], 0.0, -mb.q[0], 0.0, -mb.q[1], 0.0]);
        let lm = gram_eigenvalues(&m);
        assert!(lm[2].abs() < 1e-14 && (lm[0] - lm[1]).abs() < 1e-14);
        assert!((bentcore_w(&m, 0.8, -0.3) - bentcore_omega(lm, 0.8, -0.3).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn closed_form_examples() {
        let r = bentcore_minimize(1.0, 1.0);
        assert_eq!(r.kind, MinimizerKind::Tetrahedral);
        assert_eq!(r.lambdas, Some([0.25; 3]));
        assert!((r.omega + 3.0 / 16.0).abs() < 1e-15 && r.relative_gap().unwrap() < 1e-6 && r.restr_ok);
        let r = bentcore_minimize(1.0, -1.0);
        assert_eq!(r.kind, MinimizerKind::Rank2);
        assert_eq!(r.lambdas, Some([1.0, 1.0, 0.0]));
        assert!((r.omega + 0.5).abs() < 1e-15 && r.relative_gap().unwrap() < 1e-6 && r.restr_ok);
        let r = bentcore_minimize(0.0, 1.0);
        assert_eq!(r.kind, MinimizerKind::Zero);
        assert!(r.numerical_omega.unwrap().abs() < 1e-12);
        let r = bentcore_minimize(1.0, 0.0);
        assert_eq!(r.kind, MinimizerKind::Sphere);
        assert!((r.numerical_omega.unwrap() + 0.25).abs() < 1e-9);
        assert_eq!(bentcore_minimize(1.0, -2.5).kind, MinimizerKind::Unbounded);
        assert_eq!(bentcore_minimize(-1.0, 0.5).kind, MinimizerKind::Zero);
    }

    #[test]
    fn numerical_minimizer_has_predicted_spectrum() {
        let (_, q) = numerical_minimum(1.0, 1.0, 8, 3);
        let l = gram_eigenvalues(&q);
        assert!(l.iter().all(|v| (v - 0.25).abs() < 1e-6), "{l:?}");
        let (_, q) = numerical_minimum(1.0, -1.0, 8, 3);
        let l = gram_eigenvalues(&q);
        assert!((l[0] - 1.0).abs() < 1e-6 && (l[1] - 1.0).abs() < 1e-6 && l[2].abs() < 1e-6, "{l:?}");
    }
}
