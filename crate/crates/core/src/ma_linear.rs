//! Linear algebra of the C⊕C ≅ R²⊕R² model.
//!
//! Coordinates on R⁴ are `(x1, x2, x3, x4)` with `z = x1 + i x2` and
//! `w = x3 + i x4`. The vertical plane `V` is `{0} ⊕ R²`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, fabs, sin, sqrt};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot4, norm4, null_space, scale4, sub4, sym2_eigenvalues, Vec4};
use crate::quaternion::{left_complex, LinOp4, Quaternion};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LinearError {
    #[error("independent computations disagree: {0}")]
    InternalInconsistency(&'static str),
    #[error("triple is not orthonormal and imaginary")]
    BadTriple,
    #[error("plane is not a complex line")]
    NotComplexLine,
    #[error("the form m takes negative values on the plane")]
    NegativeDirectionPresent,
    #[error("plane spanning vectors are linearly dependent")]
    DegeneratePlane,
}

/// Real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Standard complex structure `J0 = [[0, -1], [1, 0]]`.
    pub const fn j0() -> Self {
        Self::new(0.0, -1.0, 1.0, 0.0)
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Self::new(a, 0.0, 0.0, d)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (sin(theta), cos(theta));
        Self::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.m[0][0], s * self.m[0][1], s * self.m[1][0], s * self.m[1][1])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        Some(Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0]).scale(1.0 / d))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max(fabs(self.m[r][c] - o.m[r][c]));
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zero())
    }

    /// Eigenvalues `(min, max)` of the symmetric part.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.m[0][1] + self.m[1][0]);
        sym2_eigenvalues(self.m[0][0], off, self.m[1][1])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Self {
        Self::new(
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
            rng.gen_range(-r..r),
        )
    }
}

/// How a [`Plane4`] was specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlaneRepr {
    /// `{(x, A x)}`, oriented by the images of `e1, e2`.
    GraphOf(Mat2),
    /// Orthonormal basis, oriented by its order.
    Basis([Vec4; 2]),
}

/// Oriented 2-plane in R⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane4 {
    pub repr: PlaneRepr,
    /// `+1` keeps the orientation of the representation, `-1` reverses it.
    pub orientation: i8,
}

impl Plane4 {
    pub fn graph(a: Mat2) -> Self {
        Self {
            repr: PlaneRepr::GraphOf(a),
            orientation: 1,
        }
    }

    /// Plane spanned by `u, v`, oriented by `(u, v)`.
    ///
    /// The spanning pair is orthonormalised by Gram–Schmidt starting from the
    /// vector of larger norm; the orientation is kept.
    pub fn from_vectors(u: Vec4, v: Vec4) -> Result<Self, LinearError> {
        let (first, second, sign) = if norm4(v) > norm4(u) {
            (v, u, -1.0)
        } else {
            (u, v, 1.0)
        };
        let n1 = norm4(first);
        if n1 <= tol::STRUCTURE {
            return Err(LinearError::DegeneratePlane);
        }
        let b1 = scale4(1.0 / n1, first);
        let r = sub4(second, scale4(dot4(second, b1), b1));
        let n2 = norm4(r);
        if n2 <= tol::STRUCTURE * norm4(second).max(1.0) {
            return Err(LinearError::DegeneratePlane);
        }
        let b2 = scale4(sign / n2, r);
        // (first, second) with sign reproduces the orientation of (u, v).
        Ok(Self {
            repr: PlaneRepr::Basis([b1, b2]),
            orientation: 1,
        })
    }

    /// Coordinate plane `span{e_i, e_j}` (zero-based indices).
    pub fn coordinate(i: usize, j: usize) -> Self {
        let mut u = [0.0; 4];
        let mut v = [0.0; 4];
        u[i] = 1.0;
        v[j] = 1.0;
        Self {
            repr: PlaneRepr::Basis([u, v]),
            orientation: 1,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.orientation = -self.orientation;
        self
    }

    /// Spanning vectors before orthonormalisation, respecting orientation.
    pub fn spanning(&self) -> [Vec4; 2] {
        let [u, v] = match self.repr {
            PlaneRepr::GraphOf(a) => [
                [1.0, 0.0, a.m[0][0], a.m[1][0]],
                [0.0, 1.0, a.m[0][1], a.m[1][1]],
            ],
            PlaneRepr::Basis(b) => b,
        };
        if self.orientation < 0 {
            [u, scale4(-1.0, v)]
        } else {
            [u, v]
        }
    }

    /// Oriented orthonormal basis.
    pub fn basis(&self) -> [Vec4; 2] {
        let [u, v] = self.spanning();
        let n1 = norm4(u);
        let b1 = scale4(1.0 / n1, u);
        let r = sub4(v, scale4(dot4(v, b1), b1));
        let b2 = scale4(1.0 / norm4(r), r);
        [b1, b2]
    }

    /// Orthogonal projector onto the plane.
    pub fn projector(&self) -> [[f64; 4]; 4] {
        let [b1, b2] = self.basis();
        core::array::from_fn(|r| core::array::from_fn(|c| b1[r] * b1[c] + b2[r] * b2[c]))
    }

    /// Largest entry of the difference between the two projectors.
    pub fn projector_distance(&self, other: &Self) -> f64 {
        let p = self.projector();
        let q = other.projector();
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max(fabs(p[r][c] - q[r][c]));
            }
        }
        d
    }

    /// Distance of `v` from the plane.
    pub fn residual_of(&self, v: Vec4) -> f64 {
        let [b1, b2] = self.basis();
        let r = sub4(sub4(v, scale4(dot4(v, b1), b1)), scale4(dot4(v, b2), b2));
        norm4(r)
    }

    /// Random plane from two independent gaussian-like vectors.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let u: Vec4 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v: Vec4 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            if let Ok(p) = Self::from_vectors(u, v) {
                if p.residual_of(u) < 1e-9 && norm4(u) > 0.1 && norm4(v) > 0.1 {
                    return p;
                }
            }
        }
    }
}

/// The quaternionic structure of the model together with its forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructurePack {
    pub i4: LinOp4,
    pub j4: LinOp4,
    pub k4: LinOp4,
    /// `diag(J0, J0)`, multiplication by `i` on both factors of C².
    pub j0hat: LinOp4,
    /// Gram matrix of the euclidean metric.
    pub g: LinOp4,
    /// Gram matrices of `ω_•(u, v) = g(u, • v)`; they coincide with the
    /// structures themselves because `g` is the identity.
    pub omega_i: LinOp4,
    pub omega_j: LinOp4,
    pub omega_k: LinOp4,
    /// Gram matrix of `m`, `[[0, Id], [Id, 0]]`.
    pub m: LinOp4,
    /// Oriented vertical plane `{0} ⊕ R²`.
    pub v: Plane4,
}

/// Normalisation of symmetric bilinear forms: Frobenius norm of the Gram
/// matrix divided by this constant. The model form `m` has unit norm.
pub const M_NORM_DIVISOR: f64 = 2.0;

fn block(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> LinOp4 {
    let mut m = [[0.0; 4]; 4];
    for r in 0..2 {
        for s in 0..2 {
            m[r][s] = a.m[r][s];
            m[r][s + 2] = b.m[r][s];
            m[r + 2][s] = c.m[r][s];
            m[r + 2][s + 2] = d.m[r][s];
        }
    }
    LinOp4::from_rows(m)
}

pub fn build_structures() -> StructurePack {
    let j0 = Mat2::j0();
    let id = Mat2::identity();
    let o = Mat2::zero();
    let i4 = block(j0, o, o, j0.scale(-1.0));
    let j4 = block(o, j0, j0, o);
    let k4 = block(o, id.scale(-1.0), id, o);
    StructurePack {
        i4,
        j4,
        k4,
        j0hat: block(j0, o, o, j0),
        g: LinOp4::identity(),
        omega_i: i4,
        omega_j: j4,
        omega_k: k4,
        m: block(o, id, id, o),
        v: Plane4::coordinate(2, 3),
    }
}

impl StructurePack {
    pub fn m_form(&self, u: Vec4, v: Vec4) -> f64 {
        self.m.bilinear(u, v)
    }

    /// Largest defect among the structural identities of the pack.
    pub fn self_check(&self) -> f64 {
        let id = LinOp4::identity();
        let minus = id.scale(-1.0);
        let mut d = 0.0f64;
        for s in [&self.i4, &self.j4, &self.k4, &self.j0hat] {
            d = d.max(s.compose(s).max_abs_diff(&minus));
            d = d.max(s.orthogonality_defect());
        }
        d = d.max(self.i4.compose(&self.j4).max_abs_diff(&self.k4));
        for s in [&self.i4, &self.j4, &self.k4] {
            d = d.max(s.commutator(&self.j0hat).max_abs());
        }
        d
    }

    /// Defect of `m(·,·) = −m(I·,I·) = m(J·,J·) = −m(K·,K·)` and `m|V = 0`.
    pub fn m_invariance_defect(&self, gram: &LinOp4) -> f64 {
        let mut d = 0.0f64;
        for (s, sign) in [(&self.i4, -1.0), (&self.j4, 1.0), (&self.k4, -1.0)] {
            let pulled = s.transpose().compose(gram).compose(s).scale(sign);
            d = d.max(pulled.max_abs_diff(gram));
        }
        for (r, c) in [(2, 2), (2, 3), (3, 3)] {
            d = d.max(fabs(gram.m[r][c]));
        }
        d
    }

    /// Largest defect of an orthogonal map preserving `I4, J4, K4` and `m`.
    pub fn stabiliser_defect(&self, r: &LinOp4) -> f64 {
        let mut d = r.orthogonality_defect();
        for s in [&self.i4, &self.j4, &self.k4] {
            d = d.max(r.commutator(s).max_abs());
        }
        let pulled = r.transpose().compose(&self.m).compose(r);
        d.max(pulled.max_abs_diff(&self.m))
    }

    /// Basis of the symmetric forms that vanish on `V` and satisfy the
    /// invariance relations of `m`, each scaled to unit norm.
    pub fn m_solution_space(&self) -> Vec<LinOp4> {
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|r| (r..4).map(move |c| (r, c))).collect();
        let unit = |k: usize| {
            let (r, c) = pairs[k];
            let mut g = LinOp4::zero();
            g.m[r][c] = 1.0;
            g.m[c][r] = 1.0;
            g
        };
        let mut rows: Vec<[f64; 10]> = Vec::new();
        for (r, c) in [(2usize, 2usize), (2, 3), (3, 3)] {
            let mut row = [0.0; 10];
            row[pairs.iter().position(|p| *p == (r, c)).unwrap()] = 1.0;
            rows.push(row);
        }
        for (s, sign) in [(&self.i4, -1.0), (&self.j4, 1.0), (&self.k4, -1.0)] {
            let images: Vec<LinOp4> = (0..10)
                .map(|k| {
                    let g = unit(k);
                    s.transpose().compose(&g).compose(s).scale(sign).add(&g.scale(-1.0))
                })
                .collect();
            for &(r, c) in &pairs {
                rows.push(core::array::from_fn(|k| images[k].m[r][c]));
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        null_space(rows.len(), 10, &flat, 1e-12)
            .into_iter()
            .map(|v| {
                let mut g = LinOp4::zero();
                for (k, &(r, c)) in pairs.iter().enumerate() {
                    g.m[r][c] = v[k];
                    g.m[c][r] = v[k];
                }
                let fro = sqrt(g.m.iter().flatten().map(|x| x * x).sum::<f64>());
                g.scale(M_NORM_DIVISOR / fro)
            })
            .collect()
    }
}

/// Whether `diag(R, R)` with `R ∈ SO(2)` describes `m` within `tol`.
pub fn is_block_rotation(m: &LinOp4, tol: f64) -> bool {
    let r = Mat2::new(m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]);
    let expected = block(r, Mat2::zero(), Mat2::zero(), r);
    let rot = Mat2::new(r.m[0][0], -r.m[1][0], r.m[1][0], r.m[0][0]);
    expected.max_abs_diff(m) <= tol
        && rot.max_abs_diff(&r) <= tol
        && fabs(r.det() - 1.0) <= tol
}

/// Values `(ω_i, ω_j, ω_k)` on the oriented graph basis `(e1, Ae1), (e2, Ae2)`,
/// evaluated directly from the Gram matrices.
pub fn graph_form_values(pack: &StructurePack, a: &Mat2) -> [f64; 3] {
    let [u, v] = Plane4::graph(*a).spanning();
    [
        pack.omega_i.bilinear(u, v),
        pack.omega_j.bilinear(u, v),
        pack.omega_k.bilinear(u, v),
    ]
}

/// Lagrangian flags of a graph plane for `(ω_i, ω_j, ω_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagrangianFlags {
    pub omega_i: bool,
    pub omega_j: bool,
    pub omega_k: bool,
}

/// Classifies `GraphOf(A)` by evaluating the forms and, independently, by
/// `det A = 1`, `tr A = 0` and `A = Aᵗ`.
pub fn classify_graph_plane(pack: &StructurePack, a: &Mat2) -> Result<LagrangianFlags, LinearError> {
    let direct = graph_form_values(pack, a);
    let predicates = [a.det() - 1.0, -a.trace(), a.m[1][0] - a.m[0][1]];
    let t = tol::STRUCTURE;
    for k in 0..3 {
        if fabs(direct[k] - predicates[k]) > t {
            return Err(LinearError::InternalInconsistency("graph form values"));
        }
        if (fabs(direct[k]) <= t) != (fabs(predicates[k]) <= t) {
            return Err(LinearError::InternalInconsistency("graph lagrangian flags"));
        }
    }
    Ok(LagrangianFlags {
        omega_i: fabs(predicates[0]) <= t,
        omega_j: fabs(predicates[1]) <= t,
        omega_k: fabs(predicates[2]) <= t,
    })
}

fn check_triple(triple: &[Quaternion; 3]) -> Result<(), LinearError> {
    let t = tol::STRUCTURE;
    for (p, x) in triple.iter().enumerate() {
        if !x.is_imaginary(t) || !x.is_unit(t) {
            return Err(LinearError::BadTriple);
        }
        for y in &triple[p + 1..] {
            if fabs(crate::quaternion::qinner(*x, *y)) > t {
                return Err(LinearError::BadTriple);
            }
        }
    }
    Ok(())
}

/// `|dA(ξ,ν)² − ω_x² − ω_y² − ω_z²|` on the plane's orthonormal basis, with
/// R⁴ identified with H through the coefficient order.
pub fn calibration_residual(p: &Plane4, triple: &[Quaternion; 3]) -> Result<f64, LinearError> {
    check_triple(triple)?;
    let [xi, nu] = p.basis();
    let area2 = dot4(xi, xi) * dot4(nu, nu) - dot4(xi, nu) * dot4(xi, nu);
    let mut sum = 0.0;
    for x in triple {
        let j = left_complex(*x).map_err(|_| LinearError::BadTriple)?;
        let w = j.bilinear(xi, nu);
        sum += w * w;
    }
    Ok(fabs(area2 - sum))
}

/// Whether `s` maps the plane to itself, by the residual of `s b` off the
/// plane for each basis vector.
pub fn invariance_defect(p: &Plane4, s: &LinOp4) -> f64 {
    let [b1, b2] = p.basis();
    p.residual_of(s.apply_vec(b1)).max(p.residual_of(s.apply_vec(b2)))
}

pub fn is_invariant(p: &Plane4, s: &LinOp4) -> bool {
    invariance_defect(p, s) <= tol::STRUCTURE
}

/// Whether the plane is lagrangian for the form with Gram matrix `w`.
pub fn is_lagrangian(p: &Plane4, w: &LinOp4) -> bool {
    let [b1, b2] = p.basis();
    fabs(w.bilinear(b1, b2)) <= tol::STRUCTURE
}

/// Decides `J`-invariance and cross-checks it with the calibration
/// criterion: invariant exactly when lagrangian for both companions.
pub fn complex_line_check(
    p: &Plane4,
    j: &LinOp4,
    companions: [&LinOp4; 2],
) -> Result<bool, LinearError> {
    let invariant = is_invariant(p, j);
    let lagrangian = is_lagrangian(p, companions[0]) && is_lagrangian(p, companions[1]);
    if invariant != lagrangian {
        return Err(LinearError::InternalInconsistency("complex line criteria"));
    }
    Ok(invariant)
}

/// Completes a unit imaginary `x` to an orthonormal imaginary triple
/// `(x, y, x y)`.
pub fn companions(x: Quaternion) -> [Quaternion; 2] {
    let candidates = [Quaternion::I, Quaternion::J, Quaternion::K];
    let mut best = candidates[0];
    let mut best_dot = f64::MAX;
    for c in candidates {
        let d = fabs(crate::quaternion::qinner(c, x));
        if d < best_dot {
            best_dot = d;
            best = c;
        }
    }
    let y = (best - x.scale(crate::quaternion::qinner(best, x))).normalize();
    [y, x * y]
}

/// Whether the plane is a complex line for `J_x`, left multiplication by the
/// unit imaginary `x` in the coefficient identification R⁴ ≅ H.
pub fn is_complex_line(p: &Plane4, x: Quaternion) -> Result<bool, LinearError> {
    check_triple(&[x, companions(x)[0], companions(x)[1]])?;
    let j = left_complex(x).map_err(|_| LinearError::BadTriple)?;
    let [y, z] = companions(x);
    let jy = left_complex(y).map_err(|_| LinearError::BadTriple)?;
    let jz = left_complex(z).map_err(|_| LinearError::BadTriple)?;
    complex_line_check(p, &j, [&jy, &jz])
}

/// Whether the plane is a complex line for the model structure `J4`.
pub fn is_model_complex_line(pack: &StructurePack, p: &Plane4) -> Result<bool, LinearError> {
    complex_line_check(p, &pack.j4, [&pack.i4, &pack.k4])
}

/// Sign class of `m` on a complex line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineClass {
    Positive,
    Negative,
    Null,
}

/// Classifies a `J4`-complex line by the sign of `m`, cross-checked on a
/// second basis vector and, for null lines, against `L ∩ V ≠ {0}`.
pub fn classify_line(pack: &StructurePack, l: &Plane4) -> Result<LineClass, LinearError> {
    if !is_model_complex_line(pack, l)? {
        return Err(LinearError::NotComplexLine);
    }
    let [b1, b2] = l.basis();
    let class_of = |v: f64| {
        if v > tol::STRUCTURE {
            LineClass::Positive
        } else if v < -tol::STRUCTURE {
            LineClass::Negative
        } else {
            LineClass::Null
        }
    };
    let c1 = class_of(pack.m_form(b1, b1));
    let c2 = class_of(pack.m_form(b2, b2));
    if c1 != c2 {
        return Err(LinearError::InternalInconsistency("m sign on complex line"));
    }
    // L meets V exactly when the z-components of the basis are dependent.
    let meets_v = fabs(b1[0] * b2[1] - b1[1] * b2[0]) <= tol::STRUCTURE;
    if meets_v != (c1 == LineClass::Null) {
        return Err(LinearError::InternalInconsistency("null line criteria"));
    }
    Ok(c1)
}

/// The space-time map `Φ(z, w) = (z + w, −z̄ + w̄)`.
pub fn space_time(v: Vec4) -> (Complex64, Complex64) {
    let z = Complex64::new(v[0], v[1]);
    let w = Complex64::new(v[2], v[3]);
    (z + w, w.conj() - z.conj())
}

/// Inverse of [`space_time`].
pub fn space_time_inverse(zz: Complex64, ww: Complex64) -> Vec4 {
    // z + w = Z and w - z = conj(W), so w = (Z + conj W)/2, z = (Z - conj W)/2.
    let w = (zz + ww.conj()) * 0.5;
    let z = (zz - ww.conj()) * 0.5;
    [z.re, z.im, w.re, w.im]
}

/// Space component `φ = z + w` of the space-time map, as a real 2-vector.
pub fn phi_space(v: Vec4) -> [f64; 2] {
    let (zz, _) = space_time(v);
    [zz.re, zz.im]
}

/// The conformal invariant of a complex line: a point of the extended plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tau {
    Finite { re: f64, im: f64 },
    Infinity,
}

impl Tau {
    pub fn modulus(&self) -> f64 {
        match *self {
            Tau::Finite { re, im } => libm::hypot(re, im),
            Tau::Infinity => f64::INFINITY,
        }
    }
}

/// `τ = W / Z` for the complex line `Φ(L) = [Z : W]`.
pub fn tau_invariant(pack: &StructurePack, l: &Plane4) -> Result<Tau, LinearError> {
    if !is_model_complex_line(pack, l)? {
        return Err(LinearError::NotComplexLine);
    }
    let [b1, b2] = l.basis();
    let (z1, w1) = space_time(b1);
    let (z2, w2) = space_time(b2);
    // Φ(L) must be one complex line: (z2, w2) is a complex multiple of (z1, w1).
    let cross = z1 * w2 - z2 * w1;
    if cross.norm() > tol::STRUCTURE {
        return Err(LinearError::InternalInconsistency("space-time image is not a complex line"));
    }
    let scale = sqrt(z1.norm_sqr() + w1.norm_sqr());
    if z1.norm() <= tol::STRUCTURE * scale {
        return Ok(Tau::Infinity);
    }
    let t = w1 / z1;
    Ok(Tau::Finite { re: t.re, im: t.im })
}

/// Extremes of `|φ(v)|` over unit vectors of a plane on which `m ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzRatio {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn bilipschitz_ratio(pack: &StructurePack, p: &Plane4) -> Result<BilipschitzRatio, LinearError> {
    let [b1, b2] = p.basis();
    let mut sweep_min = f64::MAX;
    let mut sweep_max = 0.0f64;
    for k in 0..64 {
        let th = 2.0 * PI * (k as f64) / 64.0;
        let v = [0, 1, 2, 3].map(|i| cos(th) * b1[i] + sin(th) * b2[i]);
        if pack.m_form(v, v) < -tol::STRUCTURE {
            return Err(LinearError::NegativeDirectionPresent);
        }
        let f = phi_space(v);
        let r = libm::hypot(f[0], f[1]);
        sweep_min = sweep_min.min(r);
        sweep_max = sweep_max.max(r);
    }
    let (f1, f2) = (phi_space(b1), phi_space(b2));
    let q11 = f1[0] * f1[0] + f1[1] * f1[1];
    let q12 = f1[0] * f2[0] + f1[1] * f2[1];
    let q22 = f2[0] * f2[0] + f2[1] * f2[1];
    let (lo, hi) = sym2_eigenvalues(q11, q12, q22);
    let (min_ratio, max_ratio) = (sqrt(lo.max(0.0)), sqrt(hi.max(0.0)));
    let slack = 1e-9;
    if sweep_min < min_ratio - slack || sweep_max > max_ratio + slack {
        return Err(LinearError::InternalInconsistency("bilipschitz sweep outside eigen bounds"));
    }
    Ok(BilipschitzRatio {
        min_ratio,
        max_ratio,
    })
}
