//! Rescaling a patch by a constant factor of the metric.

use alloc::vec::Vec;
use libm::fabs;
use serde::{Deserialize, Serialize};

use super::DegenerationError;
use crate::hyp3::{fundamental_forms, fundamental_forms_scaled, log_map, SurfacePatch};
use crate::linalg::{scale3, Vec3};
use crate::ma_linear::Mat2;

/// Patch geometry in the metric `B² g`, centred at the node where `‖II‖`
/// is largest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub scale: f64,
    pub marked: (usize, usize),
    /// Row-major index of the marked node.
    pub marked_index: usize,
    /// Coordinates of the nodes in an orthonormal frame of `B² g` at the
    /// marked point, through the exponential map.
    pub local_coordinates: Vec<Vec3>,
    /// Induced metric `B² I`.
    pub first: Vec<Mat2>,
    /// `‖II‖` in the original metric.
    pub norms: Vec<f64>,
    /// `‖II‖` in the rescaled metric.
    pub rescaled_norms: Vec<f64>,
    /// Largest `|B ‖II'‖ − ‖II‖|`.
    pub scaling_defect: f64,
}

impl BlowUp {
    /// `‖II'‖` at the marked node.
    pub fn marked_norm(&self) -> f64 {
        self.rescaled_norms[self.marked_index]
    }
}

pub fn blowup_rescale(patch: &SurfacePatch, b: f64) -> Result<BlowUp, DegenerationError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(DegenerationError::BadParameter("blow-up factor"));
    }
    let base = fundamental_forms(patch)?;
    let scaled = fundamental_forms_scaled(patch, b)?;
    let n = base.shape.len();
    let norms: Vec<f64> = (0..n).map(|k| base.second_norm(k)).collect();
    let rescaled_norms: Vec<f64> = (0..n).map(|k| scaled.second_norm(k)).collect();
    let mut marked = 0;
    for (k, &v) in norms.iter().enumerate() {
        if v > norms[marked] {
            marked = k;
        }
    }
    let grid = patch.grid;
    let p0 = patch.positions[marked].to_vec();
    let local_coordinates = patch
        .positions
        .iter()
        .map(|q| scale3(b / p0[2], log_map(p0, q.to_vec())))
        .collect();
    let scaling_defect = norms
        .iter()
        .zip(&rescaled_norms)
        .map(|(a, r)| fabs(b * r - a))
        .fold(0.0, f64::max);
    Ok(BlowUp {
        scale: b,
        marked: (marked % grid.nx, marked / grid.nx),
        marked_index: marked,
        local_coordinates,
        first: scaled.first,
        norms,
        rescaled_norms,
        scaling_defect,
    })
}
