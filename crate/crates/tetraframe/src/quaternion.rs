//! Unit quaternions, the binary tetrahedral group 2T, and loops of tetrahedral frames.
//!
//! The map `q ↦ T(q) = Σ_ℓ (R_q v₀^ℓ)^{⊗3}` identifies `S³/2T` with the
//! tetrahedral variety. `T` is invariant under right multiplication by 2T, so
//! a closed loop of frames lifts to a path in `S³` whose endpoints differ by a
//! right factor in 2T; its conjugacy class is the free homotopy class.

use std::fmt;
use std::ops::{Mul, Neg};

use nalgebra::{Complex, Matrix3, Vector3};

use crate::error::{invalid, Error, Result};
use crate::frames::{rotation_from_frame, tensor3_from_vectors, Frame};
use crate::recovery::recover_tetrahedron;
use crate::tensor::TracelessSymTensor3;

/// `a + bi + cj + dk`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct UnitQuaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl UnitQuaternion {
    pub const ONE: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Normalizes the four components.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let n = (a * a + b * b + c * c + d * d).sqrt();
        Self::new(a / n, b / n, c / n, d / n)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.a * o.a + self.b * o.b + self.c * o.c + self.d * o.d
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Inverse of a unit quaternion (its conjugate).
    pub fn inverse(&self) -> Self {
        self.conj()
    }

    /// Euclidean distance in `R⁴`.
    pub fn chordal_distance(&self, o: &Self) -> f64 {
        let d = [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d];
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Great-circle distance on `S³`.
    pub fn angle_to(&self, o: &Self) -> f64 {
        2.0 * (0.5 * self.chordal_distance(o)).min(1.0).asin()
    }

    /// Quaternion of a rotation matrix, sign chosen with non-negative real part.
    pub fn from_rotation(r: &Matrix3<f64>) -> Self {
        let tr = r.trace();
        let (a, b, c, d);
        if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            a = 0.25 * s;
            b = (r[(2, 1)] - r[(1, 2)]) / s;
            c = (r[(0, 2)] - r[(2, 0)]) / s;
            d = (r[(1, 0)] - r[(0, 1)]) / s;
        } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            a = (r[(2, 1)] - r[(1, 2)]) / s;
            b = 0.25 * s;
            c = (r[(0, 1)] + r[(1, 0)]) / s;
            d = (r[(0, 2)] + r[(2, 0)]) / s;
        } else if r[(1, 1)] > r[(2, 2)] {
            let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
            a = (r[(0, 2)] - r[(2, 0)]) / s;
            b = (r[(0, 1)] + r[(1, 0)]) / s;
            c = 0.25 * s;
            d = (r[(1, 2)] + r[(2, 1)]) / s;
        } else {
            let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
            a = (r[(1, 0)] - r[(0, 1)]) / s;
            b = (r[(0, 2)] + r[(2, 0)]) / s;
            c = (r[(1, 2)] + r[(2, 1)]) / s;
            d = 0.25 * s;
        }
        let q = Self::normalized(a, b, c, d);
        if q.a < 0.0 {
            -q
        } else {
            q
        }
    }
}

impl Mul for UnitQuaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

impl Neg for UnitQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// `R_q`, the rotation `v ↦ q v q̄`.
pub fn rotation_of(q: &UnitQuaternion) -> Matrix3<f64> {
    let UnitQuaternion { a, b, c, d } = *q;
    Matrix3::new(
        a * a + b * b - c * c - d * d,
        2.0 * b * c - 2.0 * a * d,
        2.0 * a * c + 2.0 * b * d,
        2.0 * a * d + 2.0 * b * c,
        a * a + c * c - b * b - d * d,
        2.0 * c * d - 2.0 * a * b,
        2.0 * b * d - 2.0 * a * c,
        2.0 * a * b + 2.0 * c * d,
        a * a + d * d - b * b - c * c,
    )
}

/// Element of the binary tetrahedral group, stored as twice its components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BinaryTetraElement {
    doubled: [i8; 4],
}

impl BinaryTetraElement {
    /// Builds an element from doubled components, checking membership.
    pub fn from_doubled(doubled: [i8; 4]) -> Result<Self> {
        let sq: i32 = doubled.iter().map(|&x| (x as i32) * (x as i32)).sum();
        let halves = doubled.iter().all(|&x| x.abs() == 1);
        let axis = doubled.iter().filter(|&&x| x != 0).count() == 1 && doubled.iter().all(|&x| x.abs() == 2 || x == 0);
        if sq != 4 || !(halves || axis) {
            return invalid(format!("{doubled:?} is not twice an element of 2T"));
        }
        Ok(Self { doubled })
    }

    pub fn doubled(&self) -> [i8; 4] {
        self.doubled
    }

    pub fn one() -> Self {
        Self { doubled: [2, 0, 0, 0] }
    }

    pub fn minus_one() -> Self {
        Self { doubled: [-2, 0, 0, 0] }
    }

    pub fn i() -> Self {
        Self { doubled: [0, 2, 0, 0] }
    }

    pub fn j() -> Self {
        Self { doubled: [0, 0, 2, 0] }
    }

    pub fn k() -> Self {
        Self { doubled: [0, 0, 0, 2] }
    }

    /// `s = ½(1+i+j+k)`.
    pub fn s() -> Self {
        Self { doubled: [1, 1, 1, 1] }
    }

    /// `t = ½(1+i+j−k)`.
    pub fn t() -> Self {
        Self { doubled: [1, 1, 1, -1] }
    }

    /// All 24 elements.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for axis in 0..4 {
            for sign in [2i8, -2] {
                let mut d = [0i8; 4];
                d[axis] = sign;
                out.push(Self { doubled: d });
            }
        }
        for bits in 0..16u8 {
            let d: [i8; 4] = std::array::from_fn(|m| if bits >> m & 1 == 1 { -1 } else { 1 });
            out.push(Self { doubled: d });
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.doubled;
        Self { doubled: [a, -b, -c, -d] }
    }

    pub fn to_quaternion(&self) -> UnitQuaternion {
        let [a, b, c, d] = self.doubled.map(|x| x as f64 / 2.0);
        UnitQuaternion::new(a, b, c, d)
    }

    /// Exact integer power.
    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        (0..n.unsigned_abs()).fold(Self::one(), |acc, _| acc * base)
    }

    /// Nearest group element to `q` and the chordal distance to it.
    pub fn nearest(q: &UnitQuaternion) -> (Self, f64) {
        Self::all()
            .into_iter()
            .map(|g| {
                let d = g.to_quaternion().chordal_distance(q);
                (g, d)
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .expect("2T is non-empty")
    }

    /// Permutation of the standard tetrahedron induced by `R_g`:
    /// `R_g v₀^ℓ = v₀^{p[ℓ]}`.
    pub fn vertex_permutation(&self) -> [usize; 4] {
        let r = rotation_of(&self.to_quaternion());
        let v = Frame::standard_tetrahedron().vectors3();
        std::array::from_fn(|l| {
            let w = r * v[l];
            (0..4).min_by(|&x, &y| (w - v[x]).norm().partial_cmp(&(w - v[y]).norm()).unwrap()).unwrap()
        })
    }
}

impl Mul for BinaryTetraElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let [a, b, c, d] = self.doubled.map(|x| x as i32);
        let [e, f, g, h] = o.doubled.map(|x| x as i32);
        // (2p)(2q) = 4pq, so the doubled product is half of it.
        let prod = [
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        ];
        debug_assert!(prod.iter().all(|x| x % 2 == 0));
        Self { doubled: prod.map(|x| (x / 2) as i8) }
    }
}

impl fmt::Display for BinaryTetraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.doubled;
        if [a, b, c, d].iter().any(|x| x.abs() == 2) {
            let (idx, v) = self.doubled.iter().enumerate().find(|(_, x)| **x != 0).unwrap();
            let sign = if *v < 0 { "-" } else { "" };
            return write!(f, "{sign}{}", ["1", "i", "j", "k"][idx]);
        }
        let sg = |x: i8| if x < 0 { '-' } else { '+' };
        write!(f, "({}1{}i{}j{}k)/2", sg(a), sg(b), sg(c), sg(d))
    }
}

impl std::str::FromStr for BinaryTetraElement {
    type Err = Error;

    /// Parses `1`, `-i`, `s`, `t^-1`, or the printed form `(+1-i+j-k)/2`.
    fn from_str(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (sign, body) = match t.strip_prefix('-') {
            Some(rest) if !rest.starts_with('1') || rest == "1" => (-1, rest),
            _ => (1, t.as_str()),
        };
        let named = match body {
            "1" => Some(Self::one()),
            "i" => Some(Self::i()),
            "j" => Some(Self::j()),
            "k" => Some(Self::k()),
            "s" => Some(Self::s()),
            "t" => Some(Self::t()),
            "s^-1" => Some(Self::s().inverse()),
            "t^-1" => Some(Self::t().inverse()),
            "s^2" => Some(Self::s().pow(2)),
            "s^-2" => Some(Self::s().pow(-2)),
            _ => None,
        };
        if let Some(g) = named {
            return Ok(if sign < 0 { Self::minus_one() * g } else { g });
        }
        let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(")/2"));
        if let Some(inner) = inner {
            let mut doubled = [0i8; 4];
            let mut rest = inner;
            for (slot, unit) in ["1", "i", "j", "k"].iter().enumerate() {
                let sgn = match rest.chars().next() {
                    Some('+') => 1,
                    Some('-') => -1,
                    _ => return Err(Error::InvalidArgument(format!("cannot parse group element {text:?}"))),
                };
                rest = rest[1..].strip_prefix(unit).ok_or_else(|| Error::InvalidArgument(format!("cannot parse group element {text:?}")))?;
                doubled[slot] = sgn;
            }
            if rest.is_empty() {
                return Self::from_doubled(doubled);
            }
        }
        Err(Error::InvalidArgument(format!("cannot parse group element {text:?}")))
    }
}

/// The seven conjugacy classes of 2T.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConjugacyClass {
    Identity,
    SType,
    SInvType,
    S2Type,
    SInv2Type,
    MinusOne,
    Quarter,
}

impl ConjugacyClass {
    pub const ALL: [ConjugacyClass; 7] = [
        Self::Identity,
        Self::SType,
        Self::SInvType,
        Self::S2Type,
        Self::SInv2Type,
        Self::MinusOne,
        Self::Quarter,
    ];

    /// Class of an element, read from its real part and the sign of `bcd`.
    pub fn of(g: &BinaryTetraElement) -> Self {
        let [a, b, c, d] = g.doubled;
        let odd = (b as i32) * (c as i32) * (d as i32) > 0;
        match a {
            2 => Self::Identity,
            -2 => Self::MinusOne,
            0 => Self::Quarter,
            1 if odd => Self::SType,
            1 => Self::SInvType,
            _ if odd => Self::S2Type,
            _ => Self::SInv2Type,
        }
    }

    /// Canonical representative.
    pub fn representative(&self) -> BinaryTetraElement {
        let s = BinaryTetraElement::s();
        match self {
            Self::Identity => BinaryTetraElement::one(),
            Self::SType => s,
            Self::SInvType => s.inverse(),
            Self::S2Type => s * s,
            Self::SInv2Type => (s * s).inverse(),
            Self::MinusOne => BinaryTetraElement::minus_one(),
            Self::Quarter => BinaryTetraElement::i(),
        }
    }

    /// Great-circle distance of the class from 1 on `S³`.
    pub fn geodesic_length(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::Identity => 0.0,
            Self::SType | Self::SInvType => PI / 3.0,
            Self::S2Type | Self::SInv2Type => 2.0 * PI / 3.0,
            Self::MinusOne => PI,
            Self::Quarter => PI / 2.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Identity => "{1}",
            Self::SType => "{s-type}",
            Self::SInvType => "{s^-1-type}",
            Self::S2Type => "{s^2-type}",
            Self::SInv2Type => "{s^-2-type}",
            Self::MinusOne => "{-1}",
            Self::Quarter => "{±i,±j,±k}",
        }
    }
}

impl fmt::Display for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `T(q) = Σ_ℓ (R_q v₀^ℓ)^{⊗3}`.
pub fn tetra_tensor(q: &UnitQuaternion) -> TracelessSymTensor3 {
    let r = rotation_of(q);
    let v = Frame::standard_tetrahedron().vectors3();
    tensor3_from_vectors(&std::array::from_fn(|l| r * v[l]))
}

/// Constant-speed geodesic `G_σ` from 1 to `σ` on `S³`.
pub fn geodesic_generator(sigma: &BinaryTetraElement, t: f64) -> Result<UnitQuaternion> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("geodesic parameter must lie in [0,1], got {t}"));
    }
    Ok(geodesic(&sigma.to_quaternion(), t))
}

/// `G_σ(t) = cos(st) + v̂ sin(st)`, `s = arccos(Re σ)`; for `σ = −1` the `i` axis is used.
pub fn geodesic(sigma: &UnitQuaternion, t: f64) -> UnitQuaternion {
    let w = sigma.a.clamp(-1.0, 1.0);
    let v = Vector3::new(sigma.b, sigma.c, sigma.d);
    let vn = v.norm();
    if vn < 1e-15 {
        if w > 0.0 {
            return UnitQuaternion::ONE;
        }
        let ang = std::f64::consts::PI * t;
        return UnitQuaternion::new(ang.cos(), ang.sin(), 0.0, 0.0);
    }
    let s = w.acos();
    let (sn, cs) = (s * t).sin_cos();
    UnitQuaternion::new(cs, v[0] / vn * sn, v[1] / vn * sn, v[2] / vn * sn)
}

/// `F_{α,β}(re^{iθ}) = G_β((1−r)/(1−ρ)) · G_α(θ/2π)` on the annulus `ρ ≤ |z| ≤ 1`.
pub fn annulus_map(alpha: &BinaryTetraElement, beta: &BinaryTetraElement, rho: f64, z: Complex<f64>) -> Result<UnitQuaternion> {
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("annulus inner radius must lie in (0,1), got {rho}"));
    }
    let r = z.norm();
    if r < rho - 1e-12 || r > 1.0 + 1e-12 {
        return invalid(format!("|z| = {r} lies outside the annulus [{rho}, 1]"));
    }
    Ok(annulus_map_unchecked(alpha, beta, rho, z))
}

/// [`annulus_map`] with the radial parameter clamped to `[0, 1]`.
pub fn annulus_map_unchecked(alpha: &BinaryTetraElement, beta: &BinaryTetraElement, rho: f64, z: Complex<f64>) -> UnitQuaternion {
    let r = z.norm();
    let theta = z.im.atan2(z.re).rem_euclid(std::f64::consts::TAU);
    let radial = ((1.0 - r) / (1.0 - rho)).clamp(0.0, 1.0);
    let angular = (theta / std::f64::consts::TAU).clamp(0.0, 1.0);
    geodesic(&beta.to_quaternion(), radial) * geodesic(&alpha.to_quaternion(), angular)
}

/// Disk automorphism `μ_a(z) = (z − a)/(1 − āz)`.
pub fn mobius(a: Complex<f64>, z: Complex<f64>) -> Result<Complex<f64>> {
    if a.norm() >= 1.0 {
        return invalid(format!("Möbius centre must lie in the open unit disk, |a| = {}", a.norm()));
    }
    Ok((z - a) / (Complex::new(1.0, 0.0) - a.conj() * z))
}

/// A point defect `(a, α, β)` of a multi-defect boundary field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    pub center: Complex<f64>,
    pub alpha: BinaryTetraElement,
    pub beta: BinaryTetraElement,
}

fn check_defects(defects: &[Defect], rho: f64) -> Result<()> {
    // Pseudo-hyperbolic disks of radius ρ are disjoint iff |μ_a(b)| > 2ρ/(1+ρ²).
    let limit = 2.0 * rho / (1.0 + rho * rho);
    for (i, p) in defects.iter().enumerate() {
        if p.center.norm() >= 1.0 {
            return invalid("defect centres must lie in the open unit disk");
        }
        for q in &defects[i + 1..] {
            if mobius(p.center, q.center)?.norm() <= limit {
                return invalid("excision disks of two defects overlap");
            }
        }
    }
    Ok(())
}

/// Product `Π_j F_{α_j,β_j}(μ_{a_j}(z))` in listed order.
pub fn multi_defect_field(defects: &[Defect], rho: f64, z: Complex<f64>) -> Result<UnitQuaternion> {
    check_defects(defects, rho)?;
    let mut out = UnitQuaternion::ONE;
    for d in defects {
        let w = mobius(d.center, z)?;
        out = out * annulus_map(&d.alpha, &d.beta, rho, w)?;
    }
    Ok(out)
}

/// [`multi_defect_field`] evaluated everywhere in the disk (radial parameter clamped inside cores).
pub fn multi_defect_field_clamped(defects: &[Defect], rho: f64, z: Complex<f64>) -> Result<UnitQuaternion> {
    check_defects(defects, rho)?;
    let mut out = UnitQuaternion::ONE;
    for d in defects {
        let w = mobius(d.center, z)?;
        out = out * annulus_map_unchecked(&d.alpha, &d.beta, rho, w);
    }
    Ok(out)
}

/// Result of lifting a closed loop of tetrahedral tensors to `S³`.
#[derive(Clone, Debug)]
pub struct LoopClassification {
    pub class: ConjugacyClass,
    /// Holonomy `q_start⁻¹ q_end` snapped to 2T.
    pub element: BinaryTetraElement,
    pub snap_distance: f64,
    /// Largest great-circle step between consecutive lifts.
    pub max_step: f64,
}

/// Loop-lifting tolerances.
#[derive(Clone, Copy, Debug)]
pub struct LiftOptions {
    /// Variety tolerance for pointwise recovery.
    pub recovery_tol: f64,
    /// Largest admissible step on `S³` (half the rotation angle).
    pub max_step: f64,
    /// Largest admissible chordal distance of the holonomy from 2T.
    pub snap_tol: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { recovery_tol: 1e-6, max_step: std::f64::consts::PI / 12.0, snap_tol: 0.1 }
    }
}

/// Quaternion of a tetrahedral tensor, up to right multiplication by 2T.
pub fn quaternion_of_tensor(q: &TracelessSymTensor3, tol: f64) -> Result<UnitQuaternion> {
    let frame = recover_tetrahedron(q, tol)?.frame;
    quaternion_of_frame(&frame)
}

/// Quaternion of a tetrahedral frame, via `R = (3/4) A C₃ᵀ`.
pub fn quaternion_of_frame(f: &Frame) -> Result<UnitQuaternion> {
    let r = rotation_from_frame(f)?;
    let m = Matrix3::from_fn(|i, j| r[(i, j)]);
    // C₃ is related to the standard tetrahedron by a fixed rotation.
    Ok(UnitQuaternion::from_rotation(&(m * simplex_to_standard())))
}

/// Rotation `M` with `M v₀^ℓ` equal to the columns of `C₃` up to order.
fn simplex_to_standard() -> Matrix3<f64> {
    use std::sync::OnceLock;
    static M: OnceLock<Matrix3<f64>> = OnceLock::new();
    *M.get_or_init(|| {
        let r = rotation_from_frame(&Frame::standard_tetrahedron()).expect("valid frame");
        Matrix3::from_fn(|i, j| r[(i, j)]).transpose()
    })
}

/// Free homotopy class of a closed loop of tensors (samples taken cyclically).
pub fn classify_loop(tensors: &[TracelessSymTensor3]) -> Result<LoopClassification> {
    classify_loop_with(tensors, &LiftOptions::default())
}

pub fn classify_loop_with(tensors: &[TracelessSymTensor3], opts: &LiftOptions) -> Result<LoopClassification> {
    if tensors.is_empty() {
        return invalid("loop has no samples");
    }
    let quats = tensors.iter().map(|t| quaternion_of_tensor(t, opts.recovery_tol)).collect::<Result<Vec<_>>>()?;
    classify_quaternion_loop(&quats, opts)
}

/// Classifies a cyclic sequence of fibre representatives.
pub fn classify_quaternion_loop(quats: &[UnitQuaternion], opts: &LiftOptions) -> Result<LoopClassification> {
    let group: Vec<UnitQuaternion> = BinaryTetraElement::all().iter().map(|g| g.to_quaternion()).collect();
    let start = quats[0];
    let mut cur = start;
    let mut max_step: f64 = 0.0;
    for q in quats.iter().skip(1).chain(std::iter::once(&quats[0])) {
        let (best, angle) = group
            .iter()
            .map(|g| {
                let cand = *q * *g;
                (cand, cand.angle_to(&cur))
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .expect("2T is non-empty");
        if angle > opts.max_step {
            return Err(Error::Lift(format!("consecutive samples differ by {angle:.3} rad on S³; refine the loop")));
        }
        max_step = max_step.max(angle);
        cur = best;
    }
    let holonomy = start.inverse() * cur;
    let (element, snap_distance) = BinaryTetraElement::nearest(&holonomy);
    if snap_distance > opts.snap_tol {
        return Err(Error::Lift(format!("lift drifted: holonomy is {snap_distance:.3} from 2T")));
    }
    Ok(LoopClassification { class: ConjugacyClass::of(&element), element, snap_distance, max_step })
}
