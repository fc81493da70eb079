//! Quaternion algebra, the Spin(4) double cover and classification of
//! compatible complex structures and algebra automorphisms on H ≅ R⁴.
//!
//! Coefficients are always stored in the order (a, b, c, d) for 1, i, j, k.
//! Structural predicates use absolute tolerances from [`crate::tol`] and
//! assume O(1) inputs.

use core::ops::{Add, Mul, Neg, Sub};

use libm::{fabs, sqrt};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::det_dense;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("argument is not purely imaginary")]
    NonImaginaryInput,
    #[error("argument is not a unit quaternion")]
    NonUnitInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// The four basis quaternions 1, i, j, k.
    pub const fn basis() -> [Self; 4] {
        [Self::ONE, Self::I, Self::J, Self::K]
    }

    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Real part, as the quaternion `a + 0i + 0j + 0k`.
    pub fn real(self) -> Self {
        Self::new(self.a, 0.0, 0.0, 0.0)
    }

    /// Imaginary part `bi + cj + dk`.
    pub fn imag(self) -> Self {
        Self::new(0.0, self.b, self.c, self.d)
    }

    pub fn norm2(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        sqrt(self.norm2())
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.a, s * self.b, s * self.c, s * self.d)
    }

    /// Returns `self / ‖self‖`; the zero quaternion is returned unchanged.
    pub fn normalize(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn is_imaginary(self, tol: f64) -> bool {
        fabs(self.a) <= tol
    }

    pub fn is_unit(self, tol: f64) -> bool {
        fabs(self.norm() - 1.0) <= tol
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        fabs(d.a).max(fabs(d.b)).max(fabs(d.c)).max(fabs(d.d))
    }

    /// Picks the sign representative whose first non-negligible coefficient
    /// (scanning a, b, c, d) is positive.
    pub fn canonical_sign(self) -> Self {
        for v in self.to_array() {
            if fabs(v) > tol::STRUCTURE {
                return if v > 0.0 { self } else { -self };
            }
        }
        self
    }

    /// Uniformly distributed unit quaternion.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n2 = q.norm2();
            if n2 > 1e-4 && n2 <= 1.0 {
                return q.normalize();
            }
        }
    }

    /// Uniformly distributed unit imaginary quaternion.
    pub fn random_unit_imaginary<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                0.0,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n2 = q.norm2();
            if n2 > 1e-4 && n2 <= 1.0 {
                return q.normalize();
            }
        }
    }

    /// Quaternion with independent coefficients uniform in `[-r, r]`.
    pub fn random_box<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Self {
        Self::new(
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
        )
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let x = self;
        Self::new(
            x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
            x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
            x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
            x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a,
        )
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

pub fn qmul(x: Quaternion, y: Quaternion) -> Quaternion {
    x * y
}

pub fn qconj(x: Quaternion) -> Quaternion {
    x.conj()
}

/// Inner product `R(x · conj(y))`.
pub fn qinner(x: Quaternion, y: Quaternion) -> f64 {
    (x * y.conj()).a
}

/// Volume form `−R(x y z)` on imaginary quaternions.
pub fn qvolume(x: Quaternion, y: Quaternion, z: Quaternion) -> Result<f64, AlgebraError> {
    if [x, y, z].iter().any(|q| !q.is_imaginary(tol::IDENTITY)) {
        return Err(AlgebraError::NonImaginaryInput);
    }
    Ok(-(x * y * z).a)
}

/// Real linear operator on H ≅ R⁴ in the coefficient basis (1, i, j, k).
/// `m[r][c]` is row `r`, column `c`; column `c` is the image of basis vector `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinOp4 {
    pub m: [[f64; 4]; 4],
}

impl LinOp4 {
    pub const fn from_rows(m: [[f64; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { m }
    }

    pub fn zero() -> Self {
        Self { m: [[0.0; 4]; 4] }
    }

    /// Matrix of an arbitrary linear map given by its action on quaternions.
    pub fn from_map(f: impl Fn(Quaternion) -> Quaternion) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (c, e) in Quaternion::basis().iter().enumerate() {
            let img = f(*e).to_array();
            for r in 0..4 {
                m[r][c] = img[r];
            }
        }
        Self { m }
    }

    /// Left multiplication `w ↦ x w`.
    pub fn left_mul(x: Quaternion) -> Self {
        Self::from_map(|w| x * w)
    }

    /// Right multiplication `w ↦ w x`.
    pub fn right_mul(x: Quaternion) -> Self {
        Self::from_map(|w| w * x)
    }

    pub fn apply_vec(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.m[r][c] * v[c]).sum();
        }
        out
    }

    pub fn apply(&self, q: Quaternion) -> Quaternion {
        Quaternion::from_array(self.apply_vec(q.to_array()))
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[r][k] * other.m[k][c]).sum();
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.m[c][r];
            }
        }
        Self { m }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for r in 0..4 {
            for c in 0..4 {
                out.m[r][c] += other.m[r][c];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let flat: [f64; 16] = core::array::from_fn(|i| self.m[i / 4][i % 4]);
        det_dense(4, &flat)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max(fabs(self.m[r][c] - other.m[r][c]));
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |acc, v| acc.max(fabs(*v)))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// `max |MᵗM − Id|`.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().compose(self).max_abs_diff(&Self::identity())
    }

    /// Bilinear form `(u, v) ↦ uᵗ M v`.
    pub fn bilinear(&self, u: [f64; 4], v: [f64; 4]) -> f64 {
        let mv = self.apply_vec(v);
        (0..4).map(|i| u[i] * mv[i]).sum()
    }

    /// Commutator `self ∘ other − other ∘ self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).add(&other.compose(self).scale(-1.0))
    }
}

impl Mul for LinOp4 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.compose(&o)
    }
}

/// The double cover `h(x, y): z ↦ x z conj(y)` onto SO(4).
pub fn spin_action(x: Quaternion, y: Quaternion) -> Result<LinOp4, AlgebraError> {
    if !x.is_unit(tol::IDENTITY) || !y.is_unit(tol::IDENTITY) {
        return Err(AlgebraError::NonUnitInput);
    }
    let yc = y.conj();
    Ok(LinOp4::from_map(|z| x * z * yc))
}

/// Compatible complex structure `J_x = h(x, 1)`, left multiplication by the
/// unit imaginary quaternion `x`.
pub fn left_complex(x: Quaternion) -> Result<LinOp4, AlgebraError> {
    if !x.is_imaginary(tol::STRUCTURE) {
        return Err(AlgebraError::NonImaginaryInput);
    }
    if !x.is_unit(tol::STRUCTURE) {
        return Err(AlgebraError::NonUnitInput);
    }
    Ok(LinOp4::left_mul(x))
}

/// Compatible complex structure `h(1, x): w ↦ w conj(x)`.
pub fn right_complex(x: Quaternion) -> Result<LinOp4, AlgebraError> {
    if !x.is_imaginary(tol::STRUCTURE) {
        return Err(AlgebraError::NonImaginaryInput);
    }
    if !x.is_unit(tol::STRUCTURE) {
        return Err(AlgebraError::NonUnitInput);
    }
    Ok(LinOp4::right_mul(x.conj()))
}

/// Outcome of [`classify_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "quaternion")]
pub enum StructureClass {
    /// `M = h(x, 1)`, left multiplication by the unit imaginary `x`.
    LeftComplex(Quaternion),
    /// `M = h(1, x)`, that is `w ↦ w conj(x)` for the unit imaginary `x`.
    RightComplex(Quaternion),
    /// `M(w) = z w conj(z)` with `z` in canonical sign.
    Automorphism(Quaternion),
    NotApplicable,
}

/// Unit quaternion `z` whose conjugation action on the imaginary quaternions
/// is the rotation `r` (rows and columns in the basis i, j, k), by the
/// largest-diagonal branch. Returned in canonical sign.
pub fn quaternion_from_rotation(r: [[f64; 3]; 3]) -> Quaternion {
    let t = r[0][0] + r[1][1] + r[2][2];
    let cands = [t, r[0][0], r[1][1], r[2][2]];
    let mut k = 0;
    for (i, v) in cands.iter().enumerate() {
        if *v > cands[k] {
            k = i;
        }
    }
    let q = match k {
        0 => {
            let a = 0.5 * sqrt((1.0 + t).max(0.0));
            let f = 0.25 / a;
            Quaternion::new(
                a,
                (r[2][1] - r[1][2]) * f,
                (r[0][2] - r[2][0]) * f,
                (r[1][0] - r[0][1]) * f,
            )
        }
        1 => {
            let b = 0.5 * sqrt((1.0 + r[0][0] - r[1][1] - r[2][2]).max(0.0));
            let f = 0.25 / b;
            Quaternion::new(
                (r[2][1] - r[1][2]) * f,
                b,
                (r[0][1] + r[1][0]) * f,
                (r[0][2] + r[2][0]) * f,
            )
        }
        2 => {
            let c = 0.5 * sqrt((1.0 - r[0][0] + r[1][1] - r[2][2]).max(0.0));
            let f = 0.25 / c;
            Quaternion::new(
                (r[0][2] - r[2][0]) * f,
                (r[0][1] + r[1][0]) * f,
                c,
                (r[1][2] + r[2][1]) * f,
            )
        }
        _ => {
            let d = 0.5 * sqrt((1.0 - r[0][0] - r[1][1] + r[2][2]).max(0.0));
            let f = 0.25 / d;
            Quaternion::new(
                (r[1][0] - r[0][1]) * f,
                (r[0][2] + r[2][0]) * f,
                (r[1][2] + r[2][1]) * f,
                d,
            )
        }
    };
    q.normalize().canonical_sign()
}

/// Recognises left and right complex structures and inner automorphisms.
///
/// Each candidate is confirmed by rebuilding the operator and comparing
/// entrywise to [`tol::STRUCTURE`]. The categories are mutually exclusive,
/// so the identity is reported as `Automorphism(1)`.
pub fn classify_structure(m: &LinOp4) -> StructureClass {
    let tol = tol::STRUCTURE;
    let x = m.apply(Quaternion::ONE);
    if x.is_imaginary(tol) && x.is_unit(tol) {
        let xi = x.imag().normalize();
        if LinOp4::left_mul(xi).approx_eq(m, tol) {
            return StructureClass::LeftComplex(xi);
        }
        let xr = xi.conj();
        if LinOp4::right_mul(xi).approx_eq(m, tol) {
            return StructureClass::RightComplex(xr);
        }
        return StructureClass::NotApplicable;
    }
    if x.max_abs_diff(Quaternion::ONE) <= tol {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m.m[i + 1][j + 1];
            }
        }
        let z = quaternion_from_rotation(r);
        let zc = z.conj();
        if LinOp4::from_map(|w| z * w * zc).approx_eq(m, tol) {
            return StructureClass::Automorphism(z);
        }
    }
    StructureClass::NotApplicable
}
