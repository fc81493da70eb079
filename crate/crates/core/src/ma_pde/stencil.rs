//! Central-difference stencils and node-wise diagnostics.

use alloc::vec::Vec;
use libm::fabs;
use serde::{Deserialize, Serialize};

use super::{GradientField2D, Grid2D, HessianField2D, PdeError, ScalarField2D};
use crate::linalg::sym2_eigenvalues;
use crate::tol;

fn stencil_mask(u: &ScalarField2D) -> Vec<bool> {
    let g = u.grid;
    let mut mask = Vec::with_capacity(g.len());
    for j in 0..g.ny {
        for i in 0..g.nx {
            mask.push(u.stencil_valid(i, j));
        }
    }
    mask
}

fn derived(grid: Grid2D, values: Vec<f64>, mask: &[bool]) -> ScalarField2D {
    ScalarField2D {
        grid,
        values,
        mask: Some(mask.to_vec()),
    }
}

/// Second-order Hessian: 3-point stencils for `u_xx`, `u_yy` and the
/// 4-corner cross stencil for `u_xy`, on stencil-valid nodes.
pub fn hessian_fd(u: &ScalarField2D) -> Result<HessianField2D, PdeError> {
    u.require_stencil_grid()?;
    let g = u.grid;
    let mask = stencil_mask(u);
    let n = g.len();
    let (mut xx, mut xy, mut yy) = (alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let ih2 = 1.0 / (g.h * g.h);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            if !mask[k] {
                continue;
            }
            let c = u.get(i, j);
            xx[k] = (u.get(i + 1, j) - 2.0 * c + u.get(i - 1, j)) * ih2;
            yy[k] = (u.get(i, j + 1) - 2.0 * c + u.get(i, j - 1)) * ih2;
            xy[k] = (u.get(i + 1, j + 1) - u.get(i + 1, j - 1) - u.get(i - 1, j + 1)
                + u.get(i - 1, j - 1))
                * 0.25
                * ih2;
        }
    }
    Ok(HessianField2D {
        uxx: derived(g, xx, &mask),
        uxy: derived(g, xy, &mask),
        uyy: derived(g, yy, &mask),
    })
}

/// Node-wise `det Hess u − 1`.
pub fn ma_residual(u: &ScalarField2D) -> Result<ScalarField2D, PdeError> {
    let hess = hessian_fd(u)?;
    let g = u.grid;
    let values = (0..g.len())
        .map(|k| hess.uxx.values[k] * hess.uyy.values[k] - hess.uxy.values[k] * hess.uxy.values[k] - 1.0)
        .collect();
    Ok(ScalarField2D {
        grid: g,
        values,
        mask: hess.uxx.mask.clone(),
    })
}

/// Node-wise `u_xx + u_yy`.
pub fn laplacian_fd(u: &ScalarField2D) -> Result<ScalarField2D, PdeError> {
    let hess = hessian_fd(u)?;
    let values = (0..u.grid.len())
        .map(|k| hess.uxx.values[k] + hess.uyy.values[k])
        .collect();
    Ok(ScalarField2D {
        grid: u.grid,
        values,
        mask: hess.uxx.mask,
    })
}

/// Central-difference gradient on stencil-valid nodes.
pub fn gradient_fd(u: &ScalarField2D) -> Result<GradientField2D, PdeError> {
    u.require_stencil_grid()?;
    let g = u.grid;
    let mask = stencil_mask(u);
    let mut gx = alloc::vec![0.0; g.len()];
    let mut gy = alloc::vec![0.0; g.len()];
    let i2h = 0.5 / g.h;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.idx(i, j);
            if mask[k] {
                gx[k] = (u.get(i + 1, j) - u.get(i - 1, j)) * i2h;
                gy[k] = (u.get(i, j + 1) - u.get(i, j - 1)) * i2h;
            }
        }
    }
    Ok(GradientField2D {
        a1: derived(g, gx, &mask),
        a2: derived(g, gy, &mask),
    })
}

/// Defects of the graph of `α` being a pseudoholomorphic curve:
/// `|det Dα − 1|` and the largest entry of `Dα − (Dα)ᵗ`, that is
/// `|∂_y α₁ − ∂_x α₂|`.
pub fn jholo_residual(alpha: &GradientField2D) -> Result<(ScalarField2D, ScalarField2D), PdeError> {
    if alpha.a1.grid != alpha.a2.grid {
        return Err(PdeError::ShapeMismatch);
    }
    let d1 = gradient_fd(&alpha.a1)?;
    let d2 = gradient_fd(&alpha.a2)?;
    let g = alpha.grid();
    let mut mask = Vec::with_capacity(g.len());
    let mut det_res = Vec::with_capacity(g.len());
    let mut sym_res = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let ok = d1.a1.mask.as_ref().unwrap()[k] && d2.a1.mask.as_ref().unwrap()[k];
        mask.push(ok);
        let (a11, a12) = (d1.a1.values[k], d1.a2.values[k]);
        let (a21, a22) = (d2.a1.values[k], d2.a2.values[k]);
        det_res.push(if ok { fabs(a11 * a22 - a12 * a21 - 1.0) } else { 0.0 });
        sym_res.push(if ok { fabs(a12 - a21) } else { 0.0 });
    }
    Ok((derived(g, det_res, &mask), derived(g, sym_res, &mask)))
}

/// Sign pattern of a symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    Positive,
    Null,
    Negative,
    Indefinite,
}

impl Positivity {
    /// Classifies `[[a, b], [b, c]]` with null band `NULL_BAND · max|entry|`.
    pub fn of_symmetric(a: f64, b: f64, c: f64) -> Self {
        let scale = fabs(a).max(fabs(b)).max(fabs(c));
        let eps = tol::NULL_BAND * scale;
        let (lo, hi) = sym2_eigenvalues(a, b, c);
        if lo > eps {
            Positivity::Positive
        } else if hi < -eps {
            Positivity::Negative
        } else if lo < -eps && hi > eps {
            Positivity::Indefinite
        } else {
            Positivity::Null
        }
    }
}

/// Node-wise classes, `None` where the stencil is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityField {
    pub grid: Grid2D,
    pub classes: Vec<Option<Positivity>>,
}

impl PositivityField {
    pub fn get(&self, i: usize, j: usize) -> Option<Positivity> {
        self.classes[self.grid.idx(i, j)]
    }

    /// Whether every classified node carries `class`.
    pub fn all(&self, class: Positivity) -> bool {
        self.classes.iter().flatten().all(|c| *c == class)
    }
}

pub fn positivity_field(u: &ScalarField2D) -> Result<PositivityField, PdeError> {
    let hess = hessian_fd(u)?;
    let g = u.grid;
    let classes = (0..g.len())
        .map(|k| {
            if hess.uxx.mask.as_ref().unwrap()[k] {
                Some(Positivity::of_symmetric(
                    hess.uxx.values[k],
                    hess.uxy.values[k],
                    hess.uyy.values[k],
                ))
            } else {
                None
            }
        })
        .collect();
    Ok(PositivityField { grid: g, classes })
}
