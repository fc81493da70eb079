//! The non-quadratic convex solution `φ(x, y) = x²/y + y³/12` on the upper
//! half-plane, its one-form, and the holomorphic immersion it comes from.

use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Sub};
use libm::fabs;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GradientField2D, Grid2D, PdeError, ScalarField2D};
use crate::linalg::{scale4, sub4, Vec4};
use crate::ma_linear::{invariance_defect, space_time_inverse, Plane4, StructurePack};

pub fn counterexample_potential(x: f64, y: f64) -> f64 {
    x * x / y + y * y * y / 12.0
}

/// `α = (2x/y, y²/4 − x²/y²)`.
pub fn counterexample_one_form(x: f64, y: f64) -> [f64; 2] {
    [2.0 * x / y, 0.25 * y * y - x * x / (y * y)]
}

/// `(φ_xx, φ_xy, φ_yy)`.
pub fn counterexample_hessian(x: f64, y: f64) -> (f64, f64, f64) {
    (2.0 / y, -2.0 * x / (y * y), 2.0 * x * x / (y * y * y) + 0.5 * y)
}

pub fn counterexample_det_hessian(x: f64, y: f64) -> f64 {
    (2.0 / y) * (2.0 * x * x / (y * y * y) + 0.5 * y) - (2.0 * x / (y * y)) * (2.0 * x / (y * y))
}

pub fn counterexample_laplacian(x: f64, y: f64) -> f64 {
    2.0 / y + 2.0 * x * x / (y * y * y) + 0.5 * y
}

#[derive(Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn var(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
    fn cst(v: f64) -> Self {
        Self { v, d: 0.0 }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}

fn potential_dual(x: Dual, y: Dual) -> Dual {
    x * x / y + y * y * y / Dual::cst(12.0)
}

/// `dφ` by forward-mode differentiation of the potential.
pub fn counterexample_gradient(x: f64, y: f64) -> [f64; 2] {
    let gx = potential_dual(Dual::var(x), Dual::cst(y)).d;
    let gy = potential_dual(Dual::cst(x), Dual::var(y)).d;
    [gx, gy]
}

/// `F(z) = (−i − i(z+i)², i + i(z−i)²)` pulled back by the space-time map,
/// at `z = x + i y`.
pub fn counterexample_immersion(x: f64, y: f64) -> Vec4 {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(x, y);
    let zz = -i - i * (z + i) * (z + i);
    let ww = i + i * (z - i) * (z - i);
    space_time_inverse(zz, ww)
}

/// Generated family on a grid inside the open upper half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleFamily {
    pub potential: ScalarField2D,
    pub one_form: GradientField2D,
    /// Immersion in R⁴, row-major over the grid.
    pub immersion: Vec<Vec4>,
    /// Largest `|dφ − α|` over the grid.
    pub gradient_defect: f64,
}

pub fn counterexample_family(grid: Grid2D) -> Result<CounterexampleFamily, PdeError> {
    if grid.y0 <= 0.0 {
        return Err(PdeError::DomainViolation);
    }
    let potential = ScalarField2D::from_fn(grid, counterexample_potential);
    let one_form = GradientField2D::from_fn(grid, counterexample_one_form);
    let mut immersion = Vec::with_capacity(grid.len());
    let mut gradient_defect = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            immersion.push(counterexample_immersion(x, y));
            let g = counterexample_gradient(x, y);
            let a = counterexample_one_form(x, y);
            gradient_defect = gradient_defect.max(fabs(g[0] - a[0])).max(fabs(g[1] - a[1]));
        }
    }
    Ok(CounterexampleFamily {
        potential,
        one_form,
        immersion,
        gradient_defect,
    })
}

/// Largest failure of `J4`-invariance of the immersion's tangent planes,
/// with tangents from central differences over interior nodes.
pub fn immersion_tangent_defect(pack: &StructurePack, family: &CounterexampleFamily, grid: Grid2D) -> f64 {
    let at = |i: usize, j: usize| family.immersion[grid.idx(i, j)];
    let inv2h = 0.5 / grid.h;
    let mut worst = 0.0f64;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let tx = scale4(inv2h, sub4(at(i + 1, j), at(i - 1, j)));
            let ty = scale4(inv2h, sub4(at(i, j + 1), at(i, j - 1)));
            if let Ok(p) = Plane4::from_vectors(tx, ty) {
                worst = worst.max(invariance_defect(&p, &pack.j4));
            } else {
                return f64::INFINITY;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ma_linear::build_structures;
    use rand::{Rng, SeedableRng};

    #[test]
    fn spot_values() {
        assert_eq!(counterexample_potential(2.0, 1.0), 49.0 / 12.0);
        // closedness of α at (1, 1): ∂_y(2x/y) = ∂_x(y²/4 − x²/y²) = −2
        let h = 1e-6;
        let d1 = (counterexample_one_form(1.0, 1.0 + h)[0] - counterexample_one_form(1.0, 1.0 - h)[0]) / (2.0 * h);
        let d2 = (counterexample_one_form(1.0 + h, 1.0)[1] - counterexample_one_form(1.0 - h, 1.0)[1]) / (2.0 * h);
        assert!((d1 + 2.0).abs() < 1e-8 && (d2 + 2.0).abs() < 1e-8);
        assert!((counterexample_det_hessian(3.0, 0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_is_one_on_random_points() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(50);
        for _ in 0..1000 {
            let x = rng.gen_range(-3.0..3.0);
            let y = rng.gen_range(0.5..3.0);
            let (a, b, c) = counterexample_hessian(x, y);
            assert!((a * c - b * b - 1.0).abs() <= 1e-12 * (1.0 + a * c));
        }
    }

    #[test]
    fn immersion_is_graph_of_one_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(51);
        for _ in 0..200 {
            let x = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(0.5..2.0);
            let p = counterexample_immersion(x, y);
            let expected = [2.0 * x * y, 2.0 * y, 2.0 * x, y * y - x * x];
            for k in 0..4 {
                assert!((p[k] - expected[k]).abs() < 1e-12);
            }
            let a = counterexample_one_form(p[0], p[1]);
            assert!((a[0] - p[2]).abs() < 1e-12 && (a[1] - p[3]).abs() < 1e-12);
        }
    }

    #[test]
    fn family_self_consistency() {
        let g = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 16.0).unwrap();
        let fam = counterexample_family(g).unwrap();
        assert!(fam.gradient_defect <= 1e-10);
        let pack = build_structures();
        let d1 = immersion_tangent_defect(&pack, &fam, g);
        let g2 = g.refined();
        let d2 = immersion_tangent_defect(&pack, &counterexample_family(g2).unwrap(), g2);
        // The immersion is a polynomial of degree two in (x, y): central
        // differences reproduce its tangents exactly.
        assert!(d1 <= 1e-10 && d2 <= 1e-10, "{d1} {d2}");
    }

    #[test]
    fn rejects_lower_half_plane() {
        let g = Grid2D::covering(-1.0, 1.0, 0.0, 1.0, 0.25).unwrap();
        assert_eq!(counterexample_family(g).unwrap_err(), PdeError::DomainViolation);
    }
}
