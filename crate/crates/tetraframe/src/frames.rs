//! Frames of `n+1` unit vectors in `Rⁿ` with simplex symmetry.
//!
//! A frame satisfies `⟨u^j,u^k⟩ = −1/n + ((n+1)/n)δ_jk`. The simplex matrix
//! `C_n` holds one such frame in its columns; every other frame is `R C_n` for
//! a rotation `R`, recovered as `R = (n/(n+1)) A Cᵀ`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::tensor::{gram_constant, DenseTensor3, TracelessSymTensor2, TracelessSymTensor3};

/// Largest supported dimension for simplex matrices.
pub const MAX_DIM: usize = 16;

/// `n+1` unit vectors in `Rⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl Frame {
    /// Builds a frame and checks its invariants to `tol`.
    pub fn new(vectors: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let n = vectors.first().map(|v| v.len()).unwrap_or(0);
        if n < 2 || vectors.len() != n + 1 || vectors.iter().any(|v| v.len() != n) {
            return invalid("a frame needs n+1 vectors of length n ≥ 2");
        }
        let f = Self { n, vectors };
        let r = f.invariant_residual();
        if r > tol {
            return invalid(format!("frame invariants violated by {r:.3e}"));
        }
        Ok(f)
    }

    /// Builds a frame without checks.
    pub fn from_vectors_unchecked(vectors: Vec<Vec<f64>>) -> Self {
        let n = vectors[0].len();
        Self { n, vectors }
    }

    /// Vertices `(±1,±1,±1)/√3` with an even number of minus signs.
    pub fn standard_tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self::from_vectors_unchecked(vec![vec![s, s, s], vec![s, -s, -s], vec![-s, s, -s], vec![-s, -s, s]])
    }

    /// Tetrahedron containing `e³`.
    pub fn vertical_tetrahedron() -> Self {
        let a = (8.0f64 / 9.0).sqrt();
        let b = (2.0f64 / 9.0).sqrt();
        let c = (2.0f64 / 3.0).sqrt();
        Self::from_vectors_unchecked(vec![
            vec![0.0, 0.0, 1.0],
            vec![a, 0.0, -1.0 / 3.0],
            vec![-b, c, -1.0 / 3.0],
            vec![-b, -c, -1.0 / 3.0],
        ])
    }

    /// Mercedes-Benz frame with first vector at angle `theta`.
    pub fn mercedes(theta: f64) -> Self {
        let t = std::f64::consts::TAU / 3.0;
        Self::from_vectors_unchecked(
            (0..3).map(|j| vec![(theta + t * j as f64).cos(), (theta + t * j as f64).sin()]).collect(),
        )
    }

    /// Largest deviation from the inner-product and unit-sum conditions.
    pub fn invariant_residual(&self) -> f64 {
        let n = self.n as f64;
        let mut r: f64 = 0.0;
        for (j, u) in self.vectors.iter().enumerate() {
            for (k, v) in self.vectors.iter().enumerate() {
                let ip: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let target = -1.0 / n + if j == k { (n + 1.0) / n } else { 0.0 };
                r = r.max((ip - target).abs());
            }
        }
        for i in 0..self.n {
            let s: f64 = self.vectors.iter().map(|u| u[i]).sum();
            r = r.max(s.abs());
        }
        r
    }

    /// Columns as an `n×(n+1)` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n + 1, |i, j| self.vectors[j][i])
    }

    pub fn vectors3(&self) -> Vec<Vector3<f64>> {
        self.vectors.iter().map(|v| Vector3::new(v[0], v[1], v[2])).collect()
    }

    /// Copy with vectors sorted lexicographically.
    pub fn canonicalized(&self) -> Self {
        let mut v = self.vectors.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Self { n: self.n, vectors: v }
    }

    /// Largest angle between each vector of `self` and its best match in `other`.
    pub fn set_distance(&self, other: &Frame) -> f64 {
        self.vectors
            .iter()
            .map(|u| {
                other
                    .vectors
                    .iter()
                    .map(|v| {
                        let chord = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        2.0 * (0.5 * chord).min(1.0).asin()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Frame with every vector rotated by `r`.
    pub fn rotated(&self, r: &DMatrix<f64>) -> Self {
        let vectors = self
            .vectors
            .iter()
            .map(|u| (r * DVector::from_column_slice(u)).iter().copied().collect())
            .collect();
        Self { n: self.n, vectors }
    }
}

/// The `n×(n+1)` simplex matrix `C_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexMatrix {
    pub n: usize,
    pub c: DMatrix<f64>,
}

/// Builds `C_n` from `C₂ = [[√3/2, −√3/2, 0], [−1/2, −1/2, 1]]` by the recursion
/// `C_{m+1} = [[√((m+1)²−1)/(m+1) C_m, 0], [−1/(m+1) 𝟙ᵀ, 1]]`.
pub fn build_simplex_matrix(n: usize) -> Result<SimplexMatrix> {
    if !(2..=MAX_DIM).contains(&n) {
        return invalid(format!("simplex dimension must lie in 2..={MAX_DIM}, got {n}"));
    }
    let h = 3f64.sqrt() / 2.0;
    let mut c = DMatrix::from_row_slice(2, 3, &[h, -h, 0.0, -0.5, -0.5, 1.0]);
    for m in 2..n {
        let m1 = (m + 1) as f64;
        let scale = (m1 * m1 - 1.0).sqrt() / m1;
        let mut next = DMatrix::zeros(m + 1, m + 2);
        next.view_mut((0, 0), (m, m + 1)).copy_from(&(&c * scale));
        for j in 0..=m {
            next[(m, j)] = -1.0 / m1;
        }
        next[(m, m + 1)] = 1.0;
        c = next;
    }
    Ok(SimplexMatrix { n, c })
}

impl SimplexMatrix {
    pub fn frame(&self) -> Frame {
        Frame::from_vectors_unchecked((0..=self.n).map(|j| self.c.column(j).iter().copied().collect()).collect())
    }
}

fn check_rotation(r: &DMatrix<f64>, n: usize) -> Result<()> {
    if r.nrows() != n || r.ncols() != n {
        return invalid(format!("expected an {n}×{n} matrix"));
    }
    let err = (r.transpose() * r - DMatrix::identity(n, n)).norm();
    if err > 1e-10 {
        return invalid(format!("matrix is not orthogonal (‖RᵀR − I‖ = {err:.3e})"));
    }
    if r.determinant() < 0.0 {
        return invalid("matrix has determinant −1");
    }
    Ok(())
}

/// Frame formed by the columns of `R C_n`.
pub fn frame_from_rotation(r: &DMatrix<f64>, n: usize) -> Result<Frame> {
    check_rotation(r, n)?;
    let c = build_simplex_matrix(n)?;
    let a = r * &c.c;
    Ok(Frame::from_vectors_unchecked((0..=n).map(|j| a.column(j).iter().copied().collect()).collect()))
}

/// Rotation `R = (n/(n+1)) A C_nᵀ` with `A` the frame matrix.
///
/// Odd orderings of the frame vectors give `det R = −1`; in that case the
/// first two columns of `A` are swapped so the result always lies in `SO(n)`.
pub fn rotation_from_frame(f: &Frame) -> Result<DMatrix<f64>> {
    let c = build_simplex_matrix(f.n)?;
    let mut a = f.matrix();
    let scale = f.n as f64 / (f.n as f64 + 1.0);
    let mut r = &a * c.c.transpose() * scale;
    if r.determinant() < 0.0 {
        a.swap_columns(0, 1);
        r = &a * c.c.transpose() * scale;
    }
    Ok(r)
}

/// `Q_ijk = Σ_ℓ u^ℓ_i u^ℓ_j u^ℓ_k`.
pub fn tensor_from_frame(f: &Frame) -> Result<DenseTensor3> {
    let r = f.invariant_residual();
    if r > 1e-8 {
        return invalid(format!("frame invariants violated by {r:.3e}"));
    }
    Ok(DenseTensor3::sum_of_cubes(f.n, f.vectors.iter().map(|v| v.as_slice())))
}

/// [`tensor_from_frame`] for tetrahedral frames.
pub fn tensor3_from_frame(f: &Frame) -> Result<TracelessSymTensor3> {
    tensor_from_frame(f)?.to_tetra()
}

/// [`tensor_from_frame`] for Mercedes-Benz frames.
pub fn tensor2_from_frame(f: &Frame) -> Result<TracelessSymTensor2> {
    tensor_from_frame(f)?.to_mb()
}

/// Tetrahedral tensor of three column vectors `u, v, w` and their negated sum.
pub fn tensor3_from_vectors(vs: &[Vector3<f64>; 4]) -> TracelessSymTensor3 {
    let mut q = [0.0; 7];
    for u in vs {
        let (x, y, z) = (u[0], u[1], u[2]);
        q[0] += x * x * x;
        q[1] += x * x * y;
        q[2] += x * x * z;
        q[3] += x * y * y;
        q[4] += x * y * z;
        q[5] += y * y * y;
        q[6] += y * y * z;
    }
    TracelessSymTensor3::new(q)
}

/// Haar-random rotation in `SO(n)`, reproducible for a fixed seed.
pub fn random_rotation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_rotation_with(n, &mut rng)
}

/// Haar-random rotation drawn from an existing generator.
pub fn random_rotation_with<R: rand::Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    if n == 3 {
        let mut q = [0.0f64; 4];
        loop {
            for x in q.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                q.iter_mut().for_each(|x| *x /= norm);
                break;
            }
        }
        let [a, b, c, d] = q;
        let m = Matrix3::new(
            a * a + b * b - c * c - d * d,
            2.0 * (b * c - a * d),
            2.0 * (a * c + b * d),
            2.0 * (a * d + b * c),
            a * a + c * c - b * b - d * d,
            2.0 * (c * d - a * b),
            2.0 * (b * d - a * c),
            2.0 * (a * b + c * d),
            a * a + d * d - b * b - c * c,
        );
        return DMatrix::from_fn(3, 3, |i, j| m[(i, j)]);
    }
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Eigenvector–eigentensor pairs `(f^k, B^k)` with values `λ_k`.
#[derive(Clone, Debug)]
pub struct EigenPairSet {
    pub vectors: Vec<DVector<f64>>,
    pub tensors: Vec<DMatrix<f64>>,
    pub values: Vec<f64>,
}

impl EigenPairSet {
    /// `Q_i = Σ_j λ_j ⟨f^j, e^i⟩ B^j`.
    pub fn reconstruct(&self) -> DenseTensor3 {
        let n = self.vectors.len();
        let mut t = DenseTensor3::zeros(n);
        for i in 0..n {
            let mut block = DMatrix::zeros(n, n);
            for j in 0..n {
                block += &self.tensors[j] * (self.values[j] * self.vectors[j][i]);
            }
            for a in 0..n {
                for b in 0..n {
                    t.set(i, a, b, block[(a, b)]);
                }
            }
        }
        t
    }

    /// Largest residual of `Σ_j f^k_j Q_j = λ_k B^k` and `Σ_i ⟨B^k,Q_i⟩ e^i = λ_k f^k`.
    pub fn relation_residual(&self, q: &DenseTensor3) -> f64 {
        let n = q.n;
        let mut r: f64 = 0.0;
        for k in 0..n {
            let lhs = q.contract_vec(self.vectors[k].as_slice());
            r = r.max((lhs - &self.tensors[k] * self.values[k]).norm());
            let v = DVector::from_fn(n, |i, _| self.tensors[k].dot(&q.block(i)));
            r = r.max((v - &self.vectors[k] * self.values[k]).norm());
        }
        r
    }
}

fn pairs_from_vectors(q: &DenseTensor3, vectors: Vec<DVector<f64>>, values: Vec<f64>) -> EigenPairSet {
    let tensors = vectors.iter().zip(&values).map(|(f, l)| q.contract_vec(f.as_slice()) / *l).collect();
    EigenPairSet { vectors, tensors, values }
}

/// Eigenpairs from the eigendecomposition of `QQᵀ` (general path).
pub fn eigenpairs(q: &DenseTensor3) -> Result<EigenPairSet> {
    let n = q.n;
    let eig = q.gram().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let top = eig.eigenvalues[order[0]].max(0.0);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-12 * top.max(1e-300)) {
        return Err(Error::InvalidArgument("QQᵀ is rank deficient".into()));
    }
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    let values = order.iter().map(|&k| eig.eigenvalues[k].sqrt()).collect();
    Ok(pairs_from_vectors(q, vectors, values))
}

/// Eigenpairs of a frame tensor: `f^k = R e^k`, common value `λ_n`.
pub fn eigenpairs_from_frame(f: &Frame) -> Result<EigenPairSet> {
    let q = tensor_from_frame(f)?;
    let r = rotation_from_frame(f)?;
    let lambda = gram_constant(f.n).sqrt();
    let vectors = (0..f.n).map(|k| r.column(k).into_owned()).collect();
    Ok(pairs_from_vectors(&q, vectors, vec![lambda; f.n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_two_and_three() {
        let c2 = build_simplex_matrix(2).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let expect = DMatrix::from_row_slice(2, 3, &[h, -h, 0.0, -0.5, -0.5, 1.0]);
        assert!((c2.c - expect).norm() < 1e-15);
        let c3 = build_simplex_matrix(3).unwrap();
        let c2 = build_simplex_matrix(2).unwrap();
        for j in 0..4 {
            assert!((c3.c[(2, j)] - if j == 3 { 1.0 } else { -1.0 / 3.0 }).abs() < 1e-15);
        }
        let upper = c3.c.view((0, 0), (2, 3)).into_owned();
        assert!((upper - c2.c * (8f64.sqrt() / 3.0)).norm() < 1e-15);
        assert!(build_simplex_matrix(1).is_err());
        assert!(build_simplex_matrix(17).is_err());
    }

    #[test]
    fn simplex_invariants() {
        for n in 2..=MAX_DIM {
            let c = build_simplex_matrix(n).unwrap().c;
            let nf = n as f64;
            let cct = &c * c.transpose();
            assert!((cct - DMatrix::identity(n, n) * ((nf + 1.0) / nf)).norm() < 1e-13);
            let ones = DVector::from_element(n + 1, 1.0);
            assert!((&c * &ones).amax() < 1e-14);
            let ctc = c.transpose() * &c;
            let target = DMatrix::identity(n + 1, n + 1) * ((nf + 1.0) / nf) - &ones * ones.transpose() / nf;
            assert!((ctc - target).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_of_v0_to_vertical() {
        let s = 1.0 / 24f64.sqrt();
        let r0 = DMatrix::from_row_slice(
            3,
            3,
            &[4.0, -2.0, -2.0, 0.0, 2.0 * 3f64.sqrt(), -2.0 * 3f64.sqrt(), 8f64.sqrt(), 8f64.sqrt(), 8f64.sqrt()],
        ) * s;
        let moved = Frame::standard_tetrahedron().rotated(&r0);
        assert!(moved.set_distance(&Frame::vertical_tetrahedron()) < 1e-12);
        assert!(moved.invariant_residual() < 1e-14);
    }

    #[test]
    fn frame_rotation_round_trip() {
        for n in 2..=8 {
            for seed in 0..20 {
                let r = random_rotation(n, seed);
                let f = frame_from_rotation(&r, n).unwrap();
                assert!(f.invariant_residual() < 1e-12);
                let back = rotation_from_frame(&f).unwrap();
                assert!((back - &r).norm() < 1e-12);
            }
        }
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(frame_from_rotation(&r, 2).is_err());
    }

    #[test]
    fn odd_orderings_still_give_rotations() {
        let mut f = Frame::standard_tetrahedron();
        f.vectors.swap(0, 1);
        let r = rotation_from_frame(&f).unwrap();
        assert!((r.determinant() - 1.0).abs() < 1e-12);
        let g = frame_from_rotation(&r, 3).unwrap();
        assert!(g.set_distance(&f) < 1e-12);
    }

    #[test]
    fn frame_tensors_and_identities() {
        for n in 2..=8 {
            let nf = n as f64;
            for seed in 0..10 {
                let f = frame_from_rotation(&random_rotation(n, 100 + seed), n).unwrap();
                let q = tensor_from_frame(&f).unwrap();
                let g = q.gram();
                assert!((g - DMatrix::identity(n, n) * gram_constant(n)).norm() < 1e-12);
                assert!(q.trace_defect() < 1e-13);
                for u in &f.vectors {
                    let m = q.contract_vec(u);
                    let uu = DVector::from_column_slice(u);
                    let target = &uu * uu.transpose() * ((nf + 1.0) / nf) - DMatrix::identity(n, n) * ((nf + 1.0) / (nf * nf));
                    assert!((m - target).norm() < 1e-12);
                    let w = q.contract_twice(u);
                    for i in 0..n {
                        assert!((w[i] - (nf * nf - 1.0) / (nf * nf) * u[i]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn named_frame_tensors() {
        let q = tensor3_from_frame(&Frame::standard_tetrahedron()).unwrap();
        assert!((q.q[4] - 4.0 * 3f64.sqrt() / 9.0).abs() < 1e-15);
        let qv = tensor3_from_frame(&Frame::vertical_tetrahedron()).unwrap();
        assert!((qv.full()[2][2][2] - 8.0 / 9.0).abs() < 1e-15);
        let mb = tensor2_from_frame(&Frame::mercedes(0.0)).unwrap();
        assert!((mb.q[0] - 0.75).abs() < 1e-15 && mb.q[1].abs() < 1e-15);
        let fast = tensor3_from_vectors(&Frame::standard_tetrahedron().vectors3().try_into().unwrap());
        assert!((fast.to_vector() - q.to_vector()).norm() < 1e-15);
    }

    #[test]
    fn random_rotations_are_reproducible_rotations() {
        for n in [2, 3, 5] {
            let a = random_rotation(n, 42);
            let b = random_rotation(n, 42);
            assert_eq!(a, b);
            assert!((a.transpose() * &a - DMatrix::identity(n, n)).norm() < 1e-12);
            assert!((a.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_mean_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4] {
            let mut mean = DMatrix::zeros(n, n);
            let count = 100_000;
            for _ in 0..count {
                mean += random_rotation_with(n, &mut rng);
            }
            mean /= count as f64;
            assert!(mean.amax() < 0.02, "n = {n}: {mean}");
        }
    }

    #[test]
    fn eigenpairs_of_standard_tetrahedron() {
        let f = Frame::standard_tetrahedron();
        let q = tensor_from_frame(&f).unwrap();
        let l = (32.0f64 / 27.0).sqrt();
        for set in [eigenpairs(&q).unwrap(), eigenpairs_from_frame(&f).unwrap()] {
            for v in &set.values {
                assert!((v - l).abs() < 1e-12);
            }
            assert!(set.relation_residual(&q) < 1e-12);
            for j in 0..3 {
                for k in 0..3 {
                    let d = if j == k { 1.0 } else { 0.0 };
                    assert!((set.vectors[j].dot(&set.vectors[k]) - d).abs() < 1e-12);
                    assert!((set.tensors[j].dot(&set.tensors[k]) - d).abs() < 1e-12);
                }
                assert!(set.tensors[j].trace().abs() < 1e-13);
            }
            let rec = set.reconstruct();
            assert!(rec.data.iter().zip(&q.data).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        let mb = tensor_from_frame(&Frame::mercedes(0.0)).unwrap();
        let set = eigenpairs(&mb).unwrap();
        assert!((set.values[0] - (9.0f64 / 8.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eigenpair_round_trip_random_frames() {
        for n in 2..=6 {
            for seed in 0..10 {
                let f = frame_from_rotation(&random_rotation(n, 300 + seed), n).unwrap();
                let q = tensor_from_frame(&f).unwrap();
                let set = eigenpairs_from_frame(&f).unwrap();
                assert!(set.relation_residual(&q) < 1e-10);
                let rec = set.reconstruct();
                assert!(rec.data.iter().zip(&q.data).all(|(a, b)| (a - b).abs() < 1e-10));
            }
        }
        assert!(eigenpairs(&DenseTensor3::zeros(3)).is_err());
    }
}
