//! Symmetric traceless third-order tensors in two and three dimensions.
//!
//! A tensor in `H_trace(3,3)` is stored by its seven independent components
//! `(Q111, Q112, Q113, Q122, Q123, Q222, Q223)`; the two-dimensional space
//! `H_trace(2,3)` needs only `(Q111, Q112)`. Everything else follows from full
//! index symmetry and vanishing traces.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2, Matrix3, SMatrix, SVector, Vector2, Vector3};

use crate::error::{invalid, Error, Result};

/// Gram constant of the Mercedes-Benz variety: `QQᵀ = 9/8 I(2)`.
pub const LAMBDA2_SQ: f64 = 9.0 / 8.0;
/// Gram constant of the tetrahedral variety: `QQᵀ = 32/27 I(3)`.
pub const LAMBDA3_SQ: f64 = 32.0 / 27.0;
/// Double contraction of a 2D frame tensor with one of its vectors.
pub const MU2: f64 = 3.0 / 4.0;
/// Double contraction of a 3D frame tensor with one of its vectors.
pub const MU3: f64 = 8.0 / 9.0;
/// Constant of the block-sum identity `Σ_j Q_j Q_i Q_j = (α/2) Q_i`.
pub const BLOCK_SUM_ALPHA: f64 = 32.0 / 27.0;

/// Dense `3×3×3` array indexed `[i][j][k]`.
pub type Full3 = [[[f64; 3]; 3]; 3];
pub type Matrix7 = SMatrix<f64, 7, 7>;
pub type Vector7 = SVector<f64, 7>;
/// Flattened `3×9` matrix view of a three-dimensional 3-tensor.
pub type View3 = SMatrix<f64, 3, 9>;

/// Gram constant `(n+1)(n²−1)/n³` for general dimension.
pub fn gram_constant(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) * (n * n - 1.0) / (n * n * n)
}

/// Dimension of `H_trace(n,3)`, `n(n+4)(n−1)/6`.
pub fn traceless_dimension(n: usize) -> usize {
    n * (n + 4) * (n - 1) / 6
}

// ---------------------------------------------------------------------------
// Three dimensions
// ---------------------------------------------------------------------------

/// Element of `H_trace(3,3)` in minimal coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TracelessSymTensor3 {
    pub q: [f64; 7],
}

struct Basis3 {
    views: [View3; 7],
    metric: Matrix7,
    metric_inv: Matrix7,
    /// `E_a E_bᵀ` for the Hessian of `W`.
    cross: [[Matrix3<f64>; 7]; 7],
}

fn basis3() -> &'static Basis3 {
    static BASIS: OnceLock<Basis3> = OnceLock::new();
    BASIS.get_or_init(|| {
        let views: [View3; 7] = std::array::from_fn(|a| {
            let mut q = [0.0; 7];
            q[a] = 1.0;
            TracelessSymTensor3::new(q).matrix_view()
        });
        let metric = Matrix7::from_fn(|a, b| views[a].dot(&views[b]));
        let metric_inv = metric.try_inverse().expect("basis metric is positive definite");
        let cross = std::array::from_fn(|a| std::array::from_fn(|b| views[a] * views[b].transpose()));
        Basis3 { views, metric, metric_inv, cross }
    })
}

/// Frobenius metric of the minimal coordinates: `⟨A,B⟩_F = aᵀ G b`.
pub fn metric3() -> &'static Matrix7 {
    &basis3().metric
}

/// Inverse of [`metric3`].
pub fn metric3_inv() -> &'static Matrix7 {
    &basis3().metric_inv
}

/// Matrix views of the seven coordinate basis tensors.
pub fn basis3_views() -> &'static [View3; 7] {
    &basis3().views
}

impl TracelessSymTensor3 {
    pub const fn new(q: [f64; 7]) -> Self {
        Self { q }
    }

    pub const fn zero() -> Self {
        Self { q: [0.0; 7] }
    }

    pub fn from_vector(v: &Vector7) -> Self {
        Self { q: std::array::from_fn(|a| v[a]) }
    }

    pub fn to_vector(&self) -> Vector7 {
        Vector7::from_column_slice(&self.q)
    }

    /// Reads the minimal coordinates of a tensor already in the subspace.
    pub fn from_full_unchecked(t: &Full3) -> Self {
        Self::new([t[0][0][0], t[0][0][1], t[0][0][2], t[0][1][1], t[0][1][2], t[1][1][1], t[1][1][2]])
    }

    /// The three `3×3` blocks `Q_i = (Q_ijk)_jk`.
    pub fn blocks(&self) -> [Matrix3<f64>; 3] {
        let [q1, q2, q3, q4, q5, q6, q7] = self.q;
        let a = -q1 - q4;
        let b = -q2 - q6;
        let c = -q3 - q7;
        [
            Matrix3::new(q1, q2, q3, q2, q4, q5, q3, q5, a),
            Matrix3::new(q2, q4, q5, q4, q6, q7, q5, q7, b),
            Matrix3::new(q3, q5, a, q5, q7, b, a, b, c),
        ]
    }

    /// Full `3×3×3` array.
    pub fn full(&self) -> Full3 {
        let b = self.blocks();
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| b[i][(j, k)])))
    }

    /// Flattened `3×9` matrix with entry `(i, 3j+k) = Q_ijk`.
    pub fn matrix_view(&self) -> View3 {
        let b = self.blocks();
        View3::from_fn(|i, c| b[i][(c / 3, c % 3)])
    }

    /// `QQᵀ` of the matrix view.
    pub fn gram(&self) -> Matrix3<f64> {
        let v = self.matrix_view();
        v * v.transpose()
    }

    /// Squared Frobenius norm of the full tensor.
    pub fn norm_sq(&self) -> f64 {
        self.matrix_view().norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Frobenius inner product of the full tensors.
    pub fn dot(&self, other: &Self) -> f64 {
        self.to_vector().dot(&(metric3() * other.to_vector()))
    }

    /// `Σ_i v_i Q_i`.
    pub fn contract_vec(&self, v: &Vector3<f64>) -> Matrix3<f64> {
        let b = self.blocks();
        b[0] * v[0] + b[1] * v[1] + b[2] * v[2]
    }

    /// `Q(v, v, ·)`, i.e. `Σ_jk Q_ijk v_j v_k`.
    pub fn contract_twice(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let b = self.blocks();
        Vector3::new(v.dot(&(b[0] * v)), v.dot(&(b[1] * v)), v.dot(&(b[2] * v)))
    }

    /// Rotated tensor `Q'_ijk = R_ia R_jb R_kc Q_abc`.
    pub fn rotate(&self, r: &Matrix3<f64>) -> Self {
        let t = self.full();
        let mut s1 = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    s1[i][b][c] = (0..3).map(|a| r[(i, a)] * t[a][b][c]).sum();
                }
            }
        }
        let mut s2 = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for c in 0..3 {
                    s2[i][j][c] = (0..3).map(|b| r[(j, b)] * s1[i][b][c]).sum();
                }
            }
        }
        let mut out = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j][k] = (0..3).map(|c| r[(k, c)] * s2[i][j][c]).sum();
                }
            }
        }
        Self::from_full_unchecked(&out)
    }

    /// `W = ‖QQᵀ − 32/27 I‖²_F`.
    pub fn potential_w(&self) -> f64 {
        (self.gram() - Matrix3::identity() * LAMBDA3_SQ).norm_squared()
    }

    /// Partial derivatives `∂W/∂q_a` in the minimal coordinates.
    pub fn gradient_w_params(&self) -> [f64; 7] {
        let v = self.matrix_view();
        let d = v * v.transpose() - Matrix3::identity() * LAMBDA3_SQ;
        let p = d * v * 4.0;
        let views = basis3_views();
        std::array::from_fn(|a| p.dot(&views[a]))
    }

    /// Tensor gradient `Π(4(QQᵀ − λ²I)Q)` in minimal coordinates.
    pub fn gradient_w(&self) -> Self {
        Self::from_vector(&(metric3_inv() * Vector7::from_column_slice(&self.gradient_w_params())))
    }

    /// Exact Hessian of `W` with respect to the minimal coordinates.
    pub fn hessian_w_params(&self) -> Matrix7 {
        let v = self.matrix_view();
        let d = v * v.transpose() - Matrix3::identity() * LAMBDA3_SQ;
        let basis = basis3();
        let dm: [Matrix3<f64>; 7] = std::array::from_fn(|a| {
            let m = basis.views[a] * v.transpose();
            m + m.transpose()
        });
        let mut h = Matrix7::zeros();
        for a in 0..7 {
            for b in a..7 {
                let cross = basis.cross[a][b].dot(&d);
                let val = 2.0 * dm[a].dot(&dm[b]) + 4.0 * cross;
                h[(a, b)] = val;
                h[(b, a)] = val;
            }
        }
        h
    }

    /// `V(Q,ν) = ½|Q(ν,ν,·) − 8/9 ν|²`.
    pub fn boundary_v(&self, nu: &Vector3<f64>) -> Result<f64> {
        check_unit(nu.as_slice())?;
        Ok(0.5 * (self.contract_twice(nu) - nu * MU3).norm_squared())
    }

    /// Partial derivatives `∂V/∂q_a`.
    pub fn gradient_v_params(&self, nu: &Vector3<f64>) -> Result<[f64; 7]> {
        check_unit(nu.as_slice())?;
        let l = normal_contraction_map(nu);
        let r = l * self.to_vector() - nu * MU3;
        let g = l.transpose() * r;
        Ok(std::array::from_fn(|a| g[a]))
    }

    /// Tensor gradient of `V` (projected) in minimal coordinates.
    pub fn gradient_v(&self, nu: &Vector3<f64>) -> Result<Self> {
        let g = self.gradient_v_params(nu)?;
        Ok(Self::from_vector(&(metric3_inv() * Vector7::from_column_slice(&g))))
    }

    /// `max_i ‖Σ_j Q_j Q_i Q_j − (α/2) Q_i‖_F`.
    pub fn block_sum_residual(&self) -> f64 {
        let b = self.blocks();
        (0..3)
            .map(|i| {
                let s: Matrix3<f64> = (0..3).map(|j| b[j] * b[i] * b[j]).sum();
                (s - b[i] * (BLOCK_SUM_ALPHA / 2.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `QQᵀ − 32/27 I`.
    pub fn variety_residual(&self) -> f64 {
        (self.gram() - Matrix3::identity() * LAMBDA3_SQ).norm()
    }

    /// Block traces `Σ_j Q_ijj`; identically zero by construction.
    pub fn block_traces(&self) -> [f64; 3] {
        let b = self.blocks();
        std::array::from_fn(|i| b[i].trace())
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().all(|x| x.is_finite())
    }
}

/// Linear map `q ↦ Q(ν,ν,·)` as a `3×7` matrix.
pub fn normal_contraction_map(nu: &Vector3<f64>) -> SMatrix<f64, 3, 7> {
    let views = basis3_views();
    let nn = nu * nu.transpose();
    let flat: SVector<f64, 9> = SVector::from_fn(|c, _| nn[(c / 3, c % 3)]);
    SMatrix::<f64, 3, 7>::from_fn(|i, a| (views[a].row(i) * flat)[0])
}

/// Hessian of `V(·,ν)` in the minimal coordinates (`LᵀL`).
pub fn hessian_v_params(nu: &Vector3<f64>) -> Matrix7 {
    let l = normal_contraction_map(nu);
    l.transpose() * l
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return invalid(format!("expected a unit vector, got norm {n}"));
    }
    Ok(())
}

macro_rules! impl_linear {
    ($t:ty, $n:expr) => {
        impl Add for $t {
            type Output = Self;
            fn add(self, o: Self) -> Self {
                Self { q: std::array::from_fn(|a| self.q[a] + o.q[a]) }
            }
        }
        impl Sub for $t {
            type Output = Self;
            fn sub(self, o: Self) -> Self {
                Self { q: std::array::from_fn(|a| self.q[a] - o.q[a]) }
            }
        }
        impl Mul<f64> for $t {
            type Output = Self;
            fn mul(self, s: f64) -> Self {
                Self { q: self.q.map(|x| x * s) }
            }
        }
        impl Neg for $t {
            type Output = Self;
            fn neg(self) -> Self {
                Self { q: self.q.map(|x| -x) }
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: Self) {
                for a in 0..$n {
                    self.q[a] += o.q[a];
                }
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, o: Self) {
                for a in 0..$n {
                    self.q[a] -= o.q[a];
                }
            }
        }
    };
}

impl_linear!(TracelessSymTensor3, 7);
impl_linear!(TracelessSymTensor2, 2);

// ---------------------------------------------------------------------------
// Two dimensions
// ---------------------------------------------------------------------------

/// Element of `H_trace(2,3)`, matrix form `[[q1,q2,q2,−q1],[q2,−q1,−q1,−q2]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TracelessSymTensor2 {
    pub q: [f64; 2],
}

/// Frobenius metric of the 2D minimal coordinates is `4 I`.
pub const METRIC2: f64 = 4.0;

impl TracelessSymTensor2 {
    pub const fn new(q: [f64; 2]) -> Self {
        Self { q }
    }

    pub const fn zero() -> Self {
        Self { q: [0.0; 2] }
    }

    /// Tensor of a Mercedes-Benz frame whose first vector is at angle `theta`.
    pub fn from_angle(theta: f64) -> Self {
        let t = 3.0 * theta;
        Self::new([0.75 * t.cos(), 0.75 * t.sin()])
    }

    pub fn blocks(&self) -> [Matrix2<f64>; 2] {
        let [q1, q2] = self.q;
        [Matrix2::new(q1, q2, q2, -q1), Matrix2::new(q2, -q1, -q1, -q2)]
    }

    pub fn full(&self) -> [[[f64; 2]; 2]; 2] {
        let b = self.blocks();
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| b[i][(j, k)])))
    }

    /// Flattened `2×4` matrix view.
    pub fn matrix_view(&self) -> SMatrix<f64, 2, 4> {
        let b = self.blocks();
        SMatrix::<f64, 2, 4>::from_fn(|i, c| b[i][(c / 2, c % 2)])
    }

    pub fn gram(&self) -> Matrix2<f64> {
        let v = self.matrix_view();
        v * v.transpose()
    }

    pub fn norm_sq(&self) -> f64 {
        METRIC2 * (self.q[0] * self.q[0] + self.q[1] * self.q[1])
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        METRIC2 * (self.q[0] * other.q[0] + self.q[1] * other.q[1])
    }

    /// Phase `arg(q1, q2)`, three times the frame angle.
    pub fn phase(&self) -> f64 {
        self.q[1].atan2(self.q[0])
    }

    /// `W = ‖QQᵀ − 9/8 I‖²_F = 2(2|q|² − 9/8)²`.
    pub fn potential_w(&self) -> f64 {
        (self.gram() - Matrix2::identity() * LAMBDA2_SQ).norm_squared()
    }

    pub fn gradient_w_params(&self) -> [f64; 2] {
        let s = 16.0 * (2.0 * (self.q[0] * self.q[0] + self.q[1] * self.q[1]) - LAMBDA2_SQ);
        [s * self.q[0], s * self.q[1]]
    }

    /// Tensor gradient `4(QQᵀ − 9/8 I)Q` in minimal coordinates.
    pub fn gradient_w(&self) -> Self {
        let g = self.gradient_w_params();
        Self::new([g[0] / METRIC2, g[1] / METRIC2])
    }

    pub fn hessian_w_params(&self) -> Matrix2<f64> {
        let [q1, q2] = self.q;
        let s = 16.0 * (2.0 * (q1 * q1 + q2 * q2) - LAMBDA2_SQ);
        Matrix2::identity() * s + Matrix2::new(q1 * q1, q1 * q2, q1 * q2, q2 * q2) * 64.0
    }

    /// `Q(v, v, ·)`.
    pub fn contract_twice(&self, v: &Vector2<f64>) -> Vector2<f64> {
        let b = self.blocks();
        Vector2::new(v.dot(&(b[0] * v)), v.dot(&(b[1] * v)))
    }

    /// `V(Q,ν) = ½|Q(ν,ν,·) − 3/4 ν|²`.
    pub fn boundary_v(&self, nu: &Vector2<f64>) -> Result<f64> {
        check_unit(nu.as_slice())?;
        Ok(0.5 * (self.contract_twice(nu) - nu * MU2).norm_squared())
    }

    pub fn gradient_v_params(&self, nu: &Vector2<f64>) -> Result<[f64; 2]> {
        check_unit(nu.as_slice())?;
        let l = normal_contraction_map2(nu);
        let r = l * Vector2::new(self.q[0], self.q[1]) - nu * MU2;
        let g = l.transpose() * r;
        Ok([g[0], g[1]])
    }

    pub fn variety_residual(&self) -> f64 {
        (self.gram() - Matrix2::identity() * LAMBDA2_SQ).norm()
    }

    pub fn block_traces(&self) -> [f64; 2] {
        let b = self.blocks();
        [b[0].trace(), b[1].trace()]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().all(|x| x.is_finite())
    }
}

/// Linear map `q ↦ Q(ν,ν,·)` in 2D.
pub fn normal_contraction_map2(nu: &Vector2<f64>) -> Matrix2<f64> {
    let (x, y) = (nu[0], nu[1]);
    // Q(ν,ν,·) = (q1(x²−y²) + 2q2xy, q2(x²−y²) − 2q1xy)
    Matrix2::new(x * x - y * y, 2.0 * x * y, -2.0 * x * y, x * x - y * y)
}

// ---------------------------------------------------------------------------
// General dimension
// ---------------------------------------------------------------------------

/// Dense third-order tensor in `Rⁿ`, row-major `[i][j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

/// The flattened `n×n²` matrix of a 3-tensor, entry `(i, jn+k) = Q_ijk`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixView {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl MatrixView {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

impl DenseTensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let id = self.idx(i, j, k);
        self.data[id] = v;
    }

    /// Sum of `u⊗u⊗u` over the given vectors.
    pub fn sum_of_cubes<'a>(n: usize, vectors: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut t = Self::zeros(n);
        for u in vectors {
            for i in 0..n {
                for j in 0..n {
                    let uij = u[i] * u[j];
                    for k in 0..n {
                        t.data[(i * n + j) * n + k] += uij * u[k];
                    }
                }
            }
        }
        t
    }

    pub fn matrix_view(&self) -> MatrixView {
        MatrixView { rows: self.n, cols: self.n * self.n, entries: self.data.clone() }
    }

    /// Block `Q_i` as an `n×n` matrix.
    pub fn block(&self, i: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |j, k| self.get(i, j, k))
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.matrix_view().to_dmatrix();
        &m * m.transpose()
    }

    /// `Σ_i v_i Q_i`.
    pub fn contract_vec(&self, v: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| v[i] * self.get(i, j, k)).sum())
    }

    /// `Q(v, v, ·)`.
    pub fn contract_twice(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.get(i, j, k) * v[j] * v[k]).sum::<f64>()).sum())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest deviation from full index symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    for w in [self.get(j, i, k), self.get(i, k, j), self.get(k, j, i)] {
                        m = m.max((v - w).abs());
                    }
                }
            }
        }
        m
    }

    /// Largest contraction over any index pair (by symmetry, the last two).
    pub fn trace_defect(&self) -> f64 {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.get(i, j, j)).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// Orthogonal projection onto the symmetric traceless subspace.
    pub fn project_traceless(&self) -> Self {
        let n = self.n;
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = (self.get(i, j, k)
                        + self.get(i, k, j)
                        + self.get(j, i, k)
                        + self.get(j, k, i)
                        + self.get(k, i, j)
                        + self.get(k, j, i))
                        / 6.0;
                    s.set(i, j, k, v);
                }
            }
        }
        let tr: Vec<f64> = (0..n).map(|i| (0..n).map(|j| s.get(i, j, j)).sum()).collect();
        let c = 1.0 / (n as f64 + 2.0);
        let mut out = s.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let corr = d(i, j) * tr[k] + d(i, k) * tr[j] + d(j, k) * tr[i];
                    let id = out.idx(i, j, k);
                    out.data[id] -= c * corr;
                }
            }
        }
        out
    }

    pub fn to_tetra(&self) -> Result<TracelessSymTensor3> {
        if self.n != 3 {
            return invalid(format!("expected a 3-dimensional tensor, got n = {}", self.n));
        }
        let g = |i, j, k| self.get(i, j, k);
        Ok(TracelessSymTensor3::new([g(0, 0, 0), g(0, 0, 1), g(0, 0, 2), g(0, 1, 1), g(0, 1, 2), g(1, 1, 1), g(1, 1, 2)]))
    }

    pub fn to_mb(&self) -> Result<TracelessSymTensor2> {
        if self.n != 2 {
            return invalid(format!("expected a 2-dimensional tensor, got n = {}", self.n));
        }
        Ok(TracelessSymTensor2::new([self.get(0, 0, 0), self.get(0, 0, 1)]))
    }
}

impl From<&TracelessSymTensor3> for DenseTensor3 {
    fn from(t: &TracelessSymTensor3) -> Self {
        let f = t.full();
        Self { n: 3, data: f.iter().flatten().flatten().copied().collect() }
    }
}

impl From<&TracelessSymTensor2> for DenseTensor3 {
    fn from(t: &TracelessSymTensor2) -> Self {
        let f = t.full();
        Self { n: 2, data: f.iter().flatten().flatten().copied().collect() }
    }
}

/// A projected tensor of either supported dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Traceless {
    Two(TracelessSymTensor2),
    Three(TracelessSymTensor3),
}

/// Orthogonal (Frobenius) projection of an arbitrary `n×n×n` array onto `H_trace(n,3)`.
pub fn project(full: &DenseTensor3) -> Result<Traceless> {
    if full.data.len() != full.n * full.n * full.n {
        return Err(Error::InvalidArgument("tensor data length does not match n³".into()));
    }
    let p = full.project_traceless();
    match full.n {
        2 => Ok(Traceless::Two(p.to_mb()?)),
        3 => Ok(Traceless::Three(p.to_tetra()?)),
        n => invalid(format!("projection is defined for n in {{2,3}}, got {n}")),
    }
}

/// Projection of a dense `3×3×3` array.
pub fn project3(full: &Full3) -> TracelessSymTensor3 {
    let d = DenseTensor3 { n: 3, data: full.iter().flatten().flatten().copied().collect() };
    d.project_traceless().to_tetra().expect("n = 3")
}

// ---------------------------------------------------------------------------
// Boundary alignment
// ---------------------------------------------------------------------------

/// The `6×7` linear system `Q_ijk ν_k = 4/3 ν_iν_j − 4/9 δ_ij`, rows `(i,j)` with `i ≤ j`.
pub fn boundary_system(nu: &Vector3<f64>) -> (SMatrix<f64, 6, 7>, SVector<f64, 6>) {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let views = basis3_views();
    let m = SMatrix::<f64, 6, 7>::from_fn(|r, a| {
        let (i, j) = PAIRS[r];
        (0..3).map(|k| views[a][(i, 3 * j + k)] * nu[k]).sum()
    });
    let rhs = SVector::<f64, 6>::from_fn(|r, _| {
        let (i, j) = PAIRS[r];
        4.0 / 3.0 * nu[i] * nu[j] - if i == j { 4.0 / 9.0 } else { 0.0 }
    });
    (m, rhs)
}

/// Right-handed orthonormal tangent pair `(t1, t2)` with `t1 × t2 = ν`.
///
/// `t1` is the normalized tangential part of `e¹` (of `e²` when `ν` is close to `±e¹`).
pub fn tangent_basis(nu: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let reference = if nu[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    tangent_basis_with_reference(nu, &reference)
}

/// Tangent pair built from the tangential part of a fixed reference direction.
pub fn tangent_basis_with_reference(nu: &Vector3<f64>, reference: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let t1 = (reference - nu * nu.dot(reference)).normalize();
    let t2 = nu.cross(&t1);
    (t1, t2)
}

/// Rotation whose third column is `ν` and first two columns are [`tangent_basis`].
pub fn normal_frame(nu: &Vector3<f64>) -> Matrix3<f64> {
    let (t1, t2) = tangent_basis(nu);
    Matrix3::from_columns(&[t1, t2, *nu])
}

/// Boundary tensor for outward normal `ν`.
///
/// Without `theta`, returns the minimum-norm solution of [`boundary_system`].
/// With `theta`, returns the on-variety tensor containing `ν` whose tangential
/// coefficients are `a = (4√2/9)cos 3θ`, `b = −(4√2/9)sin 3θ` in the
/// [`normal_frame`] of `ν`.
pub fn dirichlet_bc_from_normal(nu: &Vector3<f64>, theta: Option<f64>) -> Result<TracelessSymTensor3> {
    check_unit(nu.as_slice())?;
    match theta {
        None => {
            let (m, rhs) = boundary_system(nu);
            let svd = m.svd(true, true);
            let sol = svd.solve(&rhs, 1e-10).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(TracelessSymTensor3::from_vector(&sol))
        }
        Some(th) => {
            let r = 4.0 * 2f64.sqrt() / 9.0;
            let a = r * (3.0 * th).cos();
            let b = -r * (3.0 * th).sin();
            let f = 4.0 / 9.0;
            let local = TracelessSymTensor3::new([a, b, -f, -a, 0.0, -b, -f]);
            Ok(local.rotate(&normal_frame(nu)))
        }
    }
}

/// Tangential three-fold phase of `Q` relative to the [`normal_frame`] of `ν`.
///
/// Returns `(Q111 − 3Q122, 3Q112 − Q222)` in the local frame; for a frame
/// containing `ν` whose remaining vectors project onto the tangent plane at
/// angles `φ, φ+2π/3, φ+4π/3`, this is proportional to `(cos 3φ, sin 3φ)`.
pub fn tangential_phase_pair(q: &TracelessSymTensor3, nu: &Vector3<f64>) -> (f64, f64) {
    phase_pair_in_frame(q, &normal_frame(nu))
}

/// [`tangential_phase_pair`] in the tangent basis [`tangent_basis_with_reference`].
pub fn tangential_phase_pair_with_reference(q: &TracelessSymTensor3, nu: &Vector3<f64>, reference: &Vector3<f64>) -> (f64, f64) {
    let (t1, t2) = tangent_basis_with_reference(nu, reference);
    phase_pair_in_frame(q, &Matrix3::from_columns(&[t1, t2, *nu]))
}

fn phase_pair_in_frame(q: &TracelessSymTensor3, frame: &Matrix3<f64>) -> (f64, f64) {
    let local = q.rotate(&frame.transpose());
    let [q1, q2, _, q4, _, q6, _] = local.q;
    (q1 - 3.0 * q4, 3.0 * q2 - q6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng, scale: f64) -> TracelessSymTensor3 {
        TracelessSymTensor3::new(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
        loop {
            let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if v.norm() > 0.1 && v.norm() < 1.0 {
                return v.normalize();
            }
        }
    }

    fn v0_tensor() -> TracelessSymTensor3 {
        let s = 1.0 / 3f64.sqrt();
        let vs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
        DenseTensor3::sum_of_cubes(3, vs.iter().map(|v| v.as_slice())).to_tetra().unwrap()
    }

    #[test]
    fn full_reconstruction_is_symmetric_and_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let q = random_tensor(&mut rng, 1.0);
            let d = DenseTensor3::from(&q);
            assert!(d.symmetry_defect() < 1e-15);
            assert!(d.trace_defect() < 1e-15);
        }
        assert_eq!(traceless_dimension(3), 7);
        assert_eq!(traceless_dimension(2), 2);
    }

    #[test]
    fn projection_matches_least_squares_onto_basis() {
        // e¹⊗e¹⊗e¹ fitted onto the seven basis tensors by normal equations.
        let mut e = DenseTensor3::zeros(3);
        e.set(0, 0, 0, 1.0);
        let views = basis3_views();
        let flat: Vec<f64> = e.data.clone();
        let rhs = Vector7::from_fn(|a, _| {
            (0..27).map(|c| views[a][(c / 9, c % 9)] * flat[c]).sum::<f64>()
        });
        let coeffs = metric3().lu().solve(&rhs).unwrap();
        let Traceless::Three(p) = project(&e).unwrap() else { panic!() };
        for a in 0..7 {
            assert!((p.q[a] - coeffs[a]).abs() < 1e-14, "{a}: {} vs {}", p.q[a], coeffs[a]);
        }
        // q1 = 1 − 3/5, q4 = q6... only the trace correction survives
        assert!((p.q[0] - 0.4).abs() < 1e-15);
        assert!((p.q[3] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a = DenseTensor3::zeros(3);
        for x in a.data.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        let p = a.project_traceless();
        let pp = p.project_traceless();
        for (x, y) in p.data.iter().zip(&pp.data) {
            assert!((x - y).abs() < 1e-15);
        }
        for view in basis3_views() {
            let ip: f64 = (0..27).map(|c| (a.data[c] - p.data[c]) * view[(c / 9, c % 9)]).sum();
            assert!(ip.abs() < 1e-14);
        }
        assert!(matches!(project(&DenseTensor3::zeros(4)), Err(Error::InvalidArgument(_))));
        let Traceless::Three(z) = project(&DenseTensor3::zeros(3)).unwrap() else { panic!() };
        assert_eq!(z, TracelessSymTensor3::zero());
    }

    #[test]
    fn contraction_of_standard_tetrahedron() {
        let q = v0_tensor();
        let c = 4.0 * 3f64.sqrt() / 9.0;
        let expect = [0.0, 0.0, 0.0, 0.0, c, 0.0, 0.0];
        for a in 0..7 {
            assert!((q.q[a] - expect[a]).abs() < 1e-15);
        }
        let m = q.contract_vec(&Vector3::x());
        let s23 = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0) * c;
        assert!((m - s23).norm() < 1e-15);
        assert_eq!(q.contract_vec(&Vector3::zeros()), Matrix3::zeros());
        assert!((q.gram() - Matrix3::identity() * LAMBDA3_SQ).norm() < 1e-14);
    }

    #[test]
    fn potentials_at_zero() {
        let z = TracelessSymTensor3::zero();
        assert!((z.potential_w() - 1024.0 / 243.0).abs() < 1e-14);
        let nu = Vector3::new(0.6, 0.0, 0.8);
        assert!((z.boundary_v(&nu).unwrap() - 32.0 / 81.0).abs() < 1e-15);
        assert!(z.boundary_v(&Vector3::new(1.0, 1.0, 0.0)).is_err());
        assert_eq!(z.block_sum_residual(), 0.0);
        assert!((TracelessSymTensor2::zero().potential_w() - 2.0 * LAMBDA2_SQ * LAMBDA2_SQ).abs() < 1e-15);
    }

    #[test]
    fn gradient_w_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..50 {
            let q = random_tensor(&mut rng, 1.0);
            let g = q.gradient_w_params();
            let gt = q.gradient_w();
            let gt_params = metric3() * gt.to_vector();
            for a in 0..7 {
                let mut p = q;
                let mut m = q;
                p.q[a] += h;
                m.q[a] -= h;
                let fd = (p.potential_w() - m.potential_w()) / (2.0 * h);
                let scale = fd.abs().max(1.0);
                assert!((g[a] - fd).abs() / scale < 1e-6, "{a}: {} vs {fd}", g[a]);
                assert!((gt_params[a] - fd).abs() / scale < 1e-6);
            }
            // tensor gradient is the projection of 4(QQᵀ−λ²I)Q
            let v = q.matrix_view();
            let full = (v * v.transpose() - Matrix3::identity() * LAMBDA3_SQ) * v * 4.0;
            let dense = DenseTensor3 { n: 3, data: (0..27).map(|c| full[(c / 9, c % 9)]).collect() };
            let Traceless::Three(p) = project(&dense).unwrap() else { panic!() };
            for a in 0..7 {
                assert!((p.q[a] - gt.q[a]).abs() < 1e-12 * (1.0 + p.q[a].abs()));
            }
        }
    }

    #[test]
    fn hessian_w_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-5;
        for _ in 0..10 {
            let q = random_tensor(&mut rng, 1.0);
            let hess = q.hessian_w_params();
            for b in 0..7 {
                let mut p = q;
                let mut m = q;
                p.q[b] += h;
                m.q[b] -= h;
                let gp = p.gradient_w_params();
                let gm = m.gradient_w_params();
                for a in 0..7 {
                    let fd = (gp[a] - gm[a]) / (2.0 * h);
                    assert!((hess[(a, b)] - fd).abs() < 1e-5 * fd.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn gradient_v_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..50 {
            let q = random_tensor(&mut rng, 1.0);
            let nu = random_unit(&mut rng);
            let g = q.gradient_v_params(&nu).unwrap();
            let gt = metric3() * q.gradient_v(&nu).unwrap().to_vector();
            for a in 0..7 {
                let mut p = q;
                let mut m = q;
                p.q[a] += h;
                m.q[a] -= h;
                let fd = (p.boundary_v(&nu).unwrap() - m.boundary_v(&nu).unwrap()) / (2.0 * h);
                let scale = fd.abs().max(1.0);
                assert!((g[a] - fd).abs() / scale < 1e-6);
                assert!((gt[a] - fd).abs() / scale < 1e-6);
            }
        }
    }

    #[test]
    fn two_dimensional_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for _ in 0..50 {
            let q = TracelessSymTensor2::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let th: f64 = rng.gen_range(0.0..6.3);
            let nu = Vector2::new(th.cos(), th.sin());
            let g = q.gradient_w_params();
            let gv = q.gradient_v_params(&nu).unwrap();
            let hess = q.hessian_w_params();
            for a in 0..2 {
                let mut p = q;
                let mut m = q;
                p.q[a] += h;
                m.q[a] -= h;
                let fd = (p.potential_w() - m.potential_w()) / (2.0 * h);
                assert!((g[a] - fd).abs() < 1e-6 * fd.abs().max(1.0));
                let fdv = (p.boundary_v(&nu).unwrap() - m.boundary_v(&nu).unwrap()) / (2.0 * h);
                assert!((gv[a] - fdv).abs() < 1e-6 * fdv.abs().max(1.0));
                let gp = p.gradient_w_params();
                let gm = m.gradient_w_params();
                for b in 0..2 {
                    let fdh = (gp[b] - gm[b]) / (2.0 * h);
                    assert!((hess[(b, a)] - fdh).abs() < 1e-5 * fdh.abs().max(1.0));
                }
            }
            assert!((q.norm_sq() - q.matrix_view().norm_squared()).abs() < 1e-14);
        }
        let mb = TracelessSymTensor2::from_angle(0.3);
        assert!(mb.potential_w() < 1e-28);
        assert!(mb.boundary_v(&Vector2::new(0.3f64.cos(), 0.3f64.sin())).unwrap() < 1e-30);
    }

    #[test]
    fn block_sum_on_standard_tetrahedron() {
        assert!(v0_tensor().block_sum_residual() < 1e-15);
    }

    #[test]
    fn boundary_system_rank_and_min_norm_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let nu = random_unit(&mut rng);
            let (m, _) = boundary_system(&nu);
            let sv = m.svd(false, false).singular_values;
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(s[4] > 1e-8 && s[5] < 1e-12, "{s:?}");
        }
        let q = dirichlet_bc_from_normal(&Vector3::z(), None).unwrap();
        let expect = [0.0, 0.0, -4.0 / 9.0, 0.0, 0.0, 0.0, -4.0 / 9.0];
        for a in 0..7 {
            assert!((q.q[a] - expect[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_tensor_with_phase_is_on_variety() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let nu = random_unit(&mut rng);
            let th = rng.gen_range(0.0..6.3);
            let q = dirichlet_bc_from_normal(&nu, Some(th)).unwrap();
            assert!(q.potential_w() < 1e-24);
            assert!(q.boundary_v(&nu).unwrap() < 1e-24);
            let (m, rhs) = boundary_system(&nu);
            assert!((m * q.to_vector() - rhs).norm() < 1e-12);
            let (c, s) = tangential_phase_pair(&q, &nu);
            let r = 16.0 * 2f64.sqrt() / 9.0;
            assert!((c - r * (3.0 * th).cos()).abs() < 1e-12);
            assert!((s + r * (3.0 * th).sin()).abs() < 1e-12);
        }
        let q = dirichlet_bc_from_normal(&Vector3::z(), Some(0.0)).unwrap();
        assert!((q.q[0] - 4.0 * 2f64.sqrt() / 9.0).abs() < 1e-15);
        assert!((q.q[1]).abs() < 1e-15);
    }

    #[test]
    fn tangent_basis_is_right_handed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let nu = random_unit(&mut rng);
            let r = normal_frame(&nu);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-13);
            assert!((r.determinant() - 1.0).abs() < 1e-13);
        }
        assert!((normal_frame(&Vector3::z()) - Matrix3::identity()).norm() < 1e-15);
    }

    #[test]
    fn rotation_preserves_gram_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = random_tensor(&mut rng, 1.0);
        let nu = random_unit(&mut rng);
        let r = normal_frame(&nu);
        let qr = q.rotate(&r);
        assert!((qr.norm_sq() - q.norm_sq()).abs() < 1e-13);
        assert!((qr.potential_w() - q.potential_w()).abs() < 1e-12);
        let back = qr.rotate(&r.transpose());
        for a in 0..7 {
            assert!((back.q[a] - q.q[a]).abs() < 1e-14);
        }
    }
}
