//! Surfaces in hyperbolic 3-space, their Gauss lifts into the unit tangent
//! bundle, and the Monge–Ampère structure carried by the Sasaki metric.
//!
//! Everything lives in the upper half-space model with metric
//! `(dx² + dy² + dz²) / z²`. Vectors are stored by their coordinate
//! components; "unit" always refers to the hyperbolic norm.

mod patch;
mod sasaki;
mod space;
mod tube;

pub use patch::{
    flat_catalog, fundamental_forms, fundamental_forms_scaled, gauss_lift,
    intrinsic_curvature, jholo_lift_residual, quasicompleteness_metric, sasaki_pullback,
    CatalogKind, FundamentalForms, GaussLift, LiftNode, LiftResidual, LiftedPatch, SurfacePatch,
};
pub use sasaki::{sasaki_ma_structure, SasakiMAPoint};
pub use space::{
    christoffel, distance, exp_map, frame_direction, from_hyperboloid, g_norm, log_map, metric,
    minkowski, parallel_transport, pull_from_hyperboloid, push_to_hyperboloid, to_hyperboloid,
    wedge, GeodesicFrame, GeodesicH3, HPoint, Isometry,
};
pub use tube::{fiber_angle, tube_surface, SplitVector, TubeNode, TubeSurface};

use crate::linalg::Vec3;
use libm::fabs;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point is not in the upper half-space")]
    OutsideModel,
    #[error("tangent vector does not have unit hyperbolic length")]
    NonUnitVector,
    #[error("parameter derivatives are not independent at node ({i}, {j})")]
    DegenerateImmersion { i: usize, j: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
}

/// Unit tangent vector `ξ ∈ T_p H³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub base: HPoint,
    pub vector: Vec3,
}

impl UnitTangent {
    pub fn new(base: HPoint, vector: Vec3) -> Result<Self, GeometryError> {
        let t = Self { base, vector };
        t.check()?;
        Ok(t)
    }

    /// Rescales `vector` to unit length.
    pub fn normalized(base: HPoint, vector: Vec3) -> Result<Self, GeometryError> {
        let n = g_norm(base.to_vec(), vector);
        if !(n > 0.0 && n.is_finite()) {
            return Err(GeometryError::NonUnitVector);
        }
        Ok(Self {
            base,
            vector: crate::linalg::scale3(1.0 / n, vector),
        })
    }

    pub fn check(&self) -> Result<(), GeometryError> {
        if fabs(g_norm(self.base.to_vec(), self.vector) - 1.0) <= crate::tol::IDENTITY {
            Ok(())
        } else {
            Err(GeometryError::NonUnitVector)
        }
    }
}
