//! Finite-difference laboratory for `det Hess u = 1` on uniform grids.
//!
//! Node `(i, j)` sits at `(x0 + i h, y0 + j h)`; values are stored row-major
//! with `i` running fastest. Derived fields keep the geometry of their input
//! and mark the nodes where a stencil could be evaluated through the mask.

mod counterexample;
mod fit;
mod newton;
mod stencil;

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, round};
use serde::{Deserialize, Serialize};

pub use counterexample::{
    counterexample_det_hessian, counterexample_family, counterexample_gradient,
    counterexample_hessian, counterexample_immersion, counterexample_laplacian,
    counterexample_one_form, counterexample_potential, immersion_tangent_defect,
    CounterexampleFamily,
};
pub use fit::{boundary_bernstein_check, quadratic_deviation, quadratic_fit, BoundaryReport};
pub use newton::{newton_ma_solve, NewtonOptions, NewtonSolution};
pub use stencil::{
    gradient_fd, hessian_fd, jholo_residual, laplacian_fd, ma_residual, positivity_field,
    Positivity, PositivityField,
};

/// Smallest admissible number of nodes per direction.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("grid {nx}x{ny} is smaller than the 5x5 stencil minimum")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grid spacing must be positive and finite")]
    BadSpacing,
    #[error("fields live on different grids or have the wrong length")]
    ShapeMismatch,
    #[error("least-squares fit is rank deficient")]
    RankDeficientFit,
    #[error("node outside the admissible domain")]
    DomainViolation,
    #[error("Newton iteration stopped after {iterations} steps with residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("linear solve failed inside Newton iteration")]
    LinearSolveFailure,
}

/// Uniform rectangular grid geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, h: f64) -> Result<Self, PdeError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(PdeError::BadSpacing);
        }
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(PdeError::GridTooSmall { nx, ny });
        }
        Ok(Self { nx, ny, x0, y0, h })
    }

    /// Grid with spacing `h` covering `[x_min, x_max] × [y_min, y_max]`; the
    /// extents must be integer multiples of `h` up to rounding.
    pub fn covering(x_min: f64, x_max: f64, y_min: f64, y_max: f64, h: f64) -> Result<Self, PdeError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(PdeError::BadSpacing);
        }
        let nx = round((x_max - x_min) / h) as usize + 1;
        let ny = round((y_max - y_min) / h) as usize + 1;
        Self::new(nx, ny, x_min, y_min, h)
    }

    /// Same domain with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            h: 0.5 * self.h,
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    /// Node of this grid located at the same point as node `(i, j)` of
    /// `coarse`, when this grid is `2^k` times finer over the same origin.
    pub fn matching_node(&self, coarse: &Grid2D, i: usize, j: usize) -> (usize, usize) {
        let r = round(coarse.h / self.h) as usize;
        (i * r, j * r)
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

/// Real values on a [`Grid2D`] with optional validity mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    /// `Some(flags)` marks which nodes carry meaningful values.
    pub mask: Option<Vec<bool>>,
}

impl ScalarField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self, PdeError> {
        if values.len() != grid.len() {
            return Err(PdeError::ShapeMismatch);
        }
        Ok(Self {
            grid,
            values,
            mask: None,
        })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self {
            grid,
            values,
            mask: None,
        }
    }

    pub fn constant(grid: Grid2D, v: f64) -> Self {
        Self {
            grid,
            values: vec![v; grid.len()],
            mask: None,
        }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, PdeError> {
        if mask.len() != self.grid.len() {
            return Err(PdeError::ShapeMismatch);
        }
        self.mask = Some(mask);
        Ok(self)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    #[inline]
    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[self.grid.idx(i, j)])
    }

    /// Whether the 3×3 stencil around `(i, j)` lies inside the grid and the
    /// mask.
    pub fn stencil_valid(&self, i: usize, j: usize) -> bool {
        if self.grid.is_edge(i, j) {
            return false;
        }
        (j - 1..=j + 1).all(|jj| (i - 1..=i + 1).all(|ii| self.is_valid(ii, jj)))
    }

    /// Iterator over valid nodes `(i, j, value)`.
    pub fn valid_nodes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.grid.ny).flat_map(move |j| {
            (0..self.grid.nx).filter_map(move |i| {
                if self.is_valid(i, j) {
                    Some((i, j, self.get(i, j)))
                } else {
                    None
                }
            })
        })
    }

    pub fn valid_count(&self) -> usize {
        self.valid_nodes().count()
    }

    /// Largest `|value|` over valid nodes.
    pub fn max_abs(&self) -> f64 {
        self.valid_nodes().fold(0.0, |acc, (_, _, v)| acc.max(fabs(v)))
    }

    /// Largest `|self − f(x, y)|` over valid nodes.
    pub fn max_error_vs(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.valid_nodes().fold(0.0, |acc, (i, j, v)| {
            acc.max(fabs(v - f(self.grid.x(i), self.grid.y(j))))
        })
    }

    /// Largest `|self − f(x, y)|` over the nodes shared with `coarse`, a grid
    /// over the same origin whose spacing is a power-of-two multiple of this
    /// one. Only nodes interior to `coarse` are compared.
    pub fn max_error_on_common_nodes(&self, coarse: &Grid2D, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut e = 0.0f64;
        for j in 1..coarse.ny - 1 {
            for i in 1..coarse.nx - 1 {
                let (fi, fj) = self.grid.matching_node(coarse, i, j);
                if self.is_valid(fi, fj) {
                    e = e.max(fabs(self.get(fi, fj) - f(coarse.x(i), coarse.y(j))));
                }
            }
        }
        e
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
            mask: self.mask.clone(),
        }
    }

    pub(crate) fn require_stencil_grid(&self) -> Result<(), PdeError> {
        if self.grid.nx < MIN_NODES || self.grid.ny < MIN_NODES {
            return Err(PdeError::GridTooSmall {
                nx: self.grid.nx,
                ny: self.grid.ny,
            });
        }
        if self.values.len() != self.grid.len() {
            return Err(PdeError::ShapeMismatch);
        }
        Ok(())
    }
}

/// Components `(α₁, α₂)` of a planar one-form or vector field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientField2D {
    pub a1: ScalarField2D,
    pub a2: ScalarField2D,
}

impl GradientField2D {
    pub fn new(a1: ScalarField2D, a2: ScalarField2D) -> Result<Self, PdeError> {
        if a1.grid != a2.grid {
            return Err(PdeError::ShapeMismatch);
        }
        Ok(Self { a1, a2 })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let a1 = ScalarField2D::from_fn(grid, |x, y| f(x, y)[0]);
        let a2 = ScalarField2D::from_fn(grid, |x, y| f(x, y)[1]);
        Self { a1, a2 }
    }

    pub fn grid(&self) -> Grid2D {
        self.a1.grid
    }
}

/// Hessian components; the mixed derivative is stored once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianField2D {
    pub uxx: ScalarField2D,
    pub uxy: ScalarField2D,
    pub uyy: ScalarField2D,
}

impl HessianField2D {
    pub fn grid(&self) -> Grid2D {
        self.uxx.grid
    }

    /// Hessian at node `(i, j)` as `(u_xx, u_xy, u_yy)`.
    pub fn at(&self, i: usize, j: usize) -> (f64, f64, f64) {
        (self.uxx.get(i, j), self.uxy.get(i, j), self.uyy.get(i, j))
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.uxx.is_valid(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction_checks() {
        assert_eq!(
            Grid2D::new(3, 3, 0.0, 0.0, 0.1),
            Err(PdeError::GridTooSmall { nx: 3, ny: 3 })
        );
        assert_eq!(Grid2D::new(5, 5, 0.0, 0.0, 0.0), Err(PdeError::BadSpacing));
        let g = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 32.0).unwrap();
        assert_eq!((g.nx, g.ny), (65, 33));
        assert!((g.x_max() - 1.0).abs() < 1e-15 && (g.y_max() - 2.0).abs() < 1e-15);
        let r = g.refined();
        assert_eq!((r.nx, r.ny), (129, 65));
        assert_eq!(r.matching_node(&g, 3, 4), (6, 8));
    }

    #[test]
    fn masked_nodes_are_skipped() {
        let g = Grid2D::new(5, 5, 0.0, 0.0, 1.0).unwrap();
        let mut mask = vec![true; 25];
        mask[g.idx(2, 2)] = false;
        let f = ScalarField2D::from_fn(g, |x, _| x).with_mask(mask).unwrap();
        assert_eq!(f.valid_count(), 24);
        assert!(!f.stencil_valid(1, 1));
        assert!(!f.stencil_valid(0, 2));
    }
}
