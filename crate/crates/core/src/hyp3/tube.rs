//! The unit normal bundle `NΓ` of a geodesic, lifted into the unit tangent
//! bundle and parametrised by arclength `s` and normal angle `θ`.

use alloc::vec::Vec;
use libm::fabs;
use serde::{Deserialize, Serialize};

use super::patch::LiftedPatch;
use super::sasaki::sasaki_ma_structure;
use super::space::{frame_direction, g_norm, parallel_transport, wedge, GeodesicH3, HPoint};
use super::{GeometryError, UnitTangent};
use crate::linalg::{scale3, sub3, Vec3, Vec4};
use crate::ma_linear::{invariance_defect, Plane4};
use crate::ma_pde::Grid2D;

/// Tangent vector of the unit tangent bundle split as `(horizontal, vertical)`.
pub type SplitVector = (Vec3, Vec3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeNode {
    pub s: f64,
    pub theta: f64,
    pub xi: UnitTangent,
    /// `(τ, 0)`.
    pub tangent_s: SplitVector,
    /// `(0, τ ∧ ξ)`.
    pub tangent_theta: SplitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSurface {
    pub geodesic: GeodesicH3,
    pub grid: Grid2D,
    pub nodes: Vec<TubeNode>,
    /// Largest distance between the analytic tangent pair and centred
    /// differences of the lift.
    pub tangent_defect: f64,
    /// Largest `|m|` on the tangent planes spanned by the finite-difference
    /// tangents.
    pub m_residual: f64,
    /// Largest hyperbolic distance from a base point to the geodesic.
    pub projection_defect: f64,
}

struct Sample {
    point: Vec3,
    tangent: Vec3,
    fiber: Vec3,
}

fn sample(geo: &GeodesicH3, s: f64, theta: f64) -> Sample {
    let f = geo.frame(s);
    Sample {
        point: f.point,
        tangent: f.tangent,
        fiber: frame_direction(&f, theta),
    }
}

/// Tube over `geo` sampled on `grid` in `(s, θ)`.
pub fn tube_surface(geo: GeodesicH3, grid: Grid2D) -> Result<TubeSurface, GeometryError> {
    geo.validate()?;
    let h = grid.h;
    let inv = 0.5 / h;
    let mut nodes = Vec::with_capacity(grid.len());
    let mut tangent_defect = 0.0f64;
    let mut m_residual = 0.0f64;
    let mut projection_defect = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (s, theta) = (grid.x(i), grid.y(j));
            let c = sample(&geo, s, theta);
            let p = c.point;
            let xi = UnitTangent::new(HPoint::from_vec(p)?, c.fiber)?;
            let ts: SplitVector = (c.tangent, [0.0; 3]);
            let tt: SplitVector = ([0.0; 3], wedge(p, c.tangent, c.fiber));

            let (sp, sm) = (sample(&geo, s + h, theta), sample(&geo, s - h, theta));
            let fd_s: SplitVector = (
                scale3(inv, sub3(sp.point, sm.point)),
                scale3(
                    inv,
                    sub3(
                        parallel_transport(sp.point, p, sp.fiber),
                        parallel_transport(sm.point, p, sm.fiber),
                    ),
                ),
            );
            let (tp, tm) = (sample(&geo, s, theta + h), sample(&geo, s, theta - h));
            let fd_t: SplitVector = ([0.0; 3], scale3(inv, sub3(tp.fiber, tm.fiber)));
            for (a, b) in [(ts, fd_s), (tt, fd_t)] {
                tangent_defect = tangent_defect
                    .max(g_norm(p, sub3(a.0, b.0)))
                    .max(g_norm(p, sub3(a.1, b.1)));
            }

            let st = sasaki_ma_structure(&xi, 0.0)?;
            let u = st.coordinates(fd_s.0, fd_s.1);
            let v = st.coordinates(fd_t.0, fd_t.1);
            m_residual = m_residual
                .max(fabs(st.m_form(u, u)))
                .max(fabs(st.m_form(u, v)))
                .max(fabs(st.m_form(v, v)));
            projection_defect = projection_defect.max(geo.distance_to(p));

            nodes.push(TubeNode {
                s,
                theta,
                xi,
                tangent_s: ts,
                tangent_theta: tt,
            });
        }
    }
    Ok(TubeSurface {
        geodesic: geo,
        grid,
        nodes,
        tangent_defect,
        m_residual,
        projection_defect,
    })
}

impl TubeSurface {
    /// Largest failure of the analytic tangent planes to be invariant under
    /// `J_φ` with constant `log_curv`.
    pub fn invariance_defect(&self, log_curv: f64) -> Result<f64, GeometryError> {
        let mut worst = 0.0f64;
        for n in &self.nodes {
            let (plane, st) = self.plane_at(n, log_curv)?;
            worst = worst.max(invariance_defect(&plane, &st.j_phi));
        }
        Ok(worst)
    }

    /// Largest distance of `J_φ(τ, 0)` from `−e^{−φ}(0, τ ∧ ξ)`.
    pub fn image_defect(&self, log_curv: f64) -> Result<f64, GeometryError> {
        let mut worst = 0.0f64;
        for n in &self.nodes {
            let st = sasaki_ma_structure(&n.xi, log_curv)?;
            let u = st.coordinates(n.tangent_s.0, n.tangent_s.1);
            let v = st.coordinates(n.tangent_theta.0, n.tangent_theta.1);
            let ju = st.j_phi.apply_vec(u);
            let f = -libm::exp(-log_curv);
            for k in 0..4 {
                worst = worst.max(fabs(ju[k] - f * v[k]));
            }
        }
        Ok(worst)
    }

    fn plane_at(&self, n: &TubeNode, log_curv: f64) -> Result<(Plane4, super::SasakiMAPoint), GeometryError> {
        let st = sasaki_ma_structure(&n.xi, log_curv)?;
        let u: Vec4 = st.coordinates(n.tangent_s.0, n.tangent_s.1);
        let v: Vec4 = st.coordinates(n.tangent_theta.0, n.tangent_theta.1);
        let plane = Plane4::from_vectors(u, v).map_err(|_| GeometryError::DegenerateImmersion { i: 0, j: 0 })?;
        Ok((plane, st))
    }

    pub fn lifted(&self) -> LiftedPatch {
        LiftedPatch {
            grid: self.grid,
            points: self.nodes.iter().map(|n| n.xi.base.to_vec()).collect(),
            fibers: self.nodes.iter().map(|n| n.xi.vector).collect(),
        }
    }
}

/// Angle of a fibre in the parallel frame `(n1, n2)` at arclength `s`.
pub fn fiber_angle(geo: &GeodesicH3, s: f64, fiber: Vec3) -> f64 {
    let f = geo.frame(s);
    let p = f.point;
    let c = super::space::metric(p, fiber, f.n1);
    let d = super::space::metric(p, fiber, f.n2);
    libm::atan2(d, c)
}
