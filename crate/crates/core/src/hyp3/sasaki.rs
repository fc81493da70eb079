//! The Monge–Ampère structure on the unit tangent bundle at a single point.
//!
//! At `ξ ∈ S_p H³` the horizontal and vertical copies of `⟨ξ⟩⊥` form
//! `W_ξ`; vectors of `W_ξ` are written `(ν, μ)` with `ν` horizontal and `μ`
//! vertical, and in coordinates relative to an orthonormal basis `(b1, b2)`
//! of `⟨ξ⟩⊥` as `(ν·b1, ν·b2, μ·b1, μ·b2)`.

use libm::{exp, fabs};
use serde::{Deserialize, Serialize};

use super::space::{metric, wedge};
use super::{GeometryError, UnitTangent};
use crate::linalg::{add3, scale3, sub3, Vec3, Vec4};
use crate::quaternion::LinOp4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasakiMAPoint {
    pub xi: UnitTangent,
    /// Orthonormal basis of `⟨ξ⟩⊥` with `(ξ, b1, b2)` positive.
    pub basis: [Vec3; 2],
    pub log_curv: f64,
    /// `J_φ(ν, μ) = (e^φ j_ξ μ, e^{−φ} j_ξ ν)` in coordinates.
    pub j_phi: LinOp4,
    /// Gram matrix of `m((ν₁, μ₁), (ν₂, μ₂)) = ⟨ν₁, μ₂⟩ + ⟨ν₂, μ₁⟩`.
    pub m_gram: LinOp4,
}

pub fn sasaki_ma_structure(xi: &UnitTangent, log_curv: f64) -> Result<SasakiMAPoint, GeometryError> {
    xi.check()?;
    if !log_curv.is_finite() {
        return Err(GeometryError::BadParameter("log-curvature"));
    }
    let p = xi.base.to_vec();
    let z = p[2];
    // start from the coordinate axis least aligned with ξ
    let v = xi.vector;
    let k = (0..3)
        .min_by(|&a, &b| fabs(v[a]).partial_cmp(&fabs(v[b])).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut axis = [0.0; 3];
    axis[k] = z;
    let b1 = sub3(axis, scale3(metric(p, axis, v), v));
    let b1 = scale3(1.0 / super::g_norm(p, b1), b1);
    let b2 = wedge(p, v, b1);
    let (e, ei) = (exp(log_curv), exp(-log_curv));
    let j_phi = LinOp4::from_rows([
        [0.0, 0.0, 0.0, -e],
        [0.0, 0.0, e, 0.0],
        [0.0, -ei, 0.0, 0.0],
        [ei, 0.0, 0.0, 0.0],
    ]);
    let m_gram = LinOp4::from_rows([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]);
    Ok(SasakiMAPoint {
        xi: *xi,
        basis: [b1, b2],
        log_curv,
        j_phi,
        m_gram,
    })
}

impl SasakiMAPoint {
    /// `j_ξ(ν) = ξ ∧ ν`.
    pub fn j_xi(&self, v: Vec3) -> Vec3 {
        wedge(self.xi.base.to_vec(), self.xi.vector, v)
    }

    /// Coordinates of `(horizontal, vertical)`; components along `ξ` are
    /// dropped.
    pub fn coordinates(&self, horizontal: Vec3, vertical: Vec3) -> Vec4 {
        let p = self.xi.base.to_vec();
        let [b1, b2] = self.basis;
        [
            metric(p, horizontal, b1),
            metric(p, horizontal, b2),
            metric(p, vertical, b1),
            metric(p, vertical, b2),
        ]
    }

    /// Inverse of [`Self::coordinates`] on `W_ξ`.
    pub fn vectors(&self, c: Vec4) -> (Vec3, Vec3) {
        let [b1, b2] = self.basis;
        (
            add3(scale3(c[0], b1), scale3(c[1], b2)),
            add3(scale3(c[2], b1), scale3(c[3], b2)),
        )
    }

    /// Basis of `V_ξ = {0} ⊕ ⟨ξ⟩⊥` in coordinates.
    pub fn vertical_basis(&self) -> [Vec4; 2] {
        [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    }

    pub fn m_form(&self, u: Vec4, v: Vec4) -> f64 {
        self.m_gram.bilinear(u, v)
    }

    /// Largest entry of `J_φ² + Id`.
    pub fn square_defect(&self) -> f64 {
        self.j_phi.compose(&self.j_phi).add(&LinOp4::identity()).max_abs()
    }

    /// Largest entry of the coordinate matrix of `j_ξ` minus `J0`.
    pub fn rotation_defect(&self) -> f64 {
        let p = self.xi.base.to_vec();
        let [b1, b2] = self.basis;
        let (jb1, jb2) = (self.j_xi(b1), self.j_xi(b2));
        let entries = [
            metric(p, jb1, b1),
            metric(p, jb1, b2) - 1.0,
            metric(p, jb2, b1) + 1.0,
            metric(p, jb2, b2),
        ];
        entries.iter().fold(0.0f64, |a, e| a.max(fabs(*e)))
    }
}
