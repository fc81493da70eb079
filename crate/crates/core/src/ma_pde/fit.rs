//! Quadratic least-squares fits and boundary-row diagnostics.

use alloc::vec::Vec;
use libm::fabs;
use serde::{Deserialize, Serialize};

use super::{laplacian_fd, PdeError, ScalarField2D};
use crate::linalg::least_squares;

const FIT_RANK_TOL: f64 = 1e-10;

/// Degree-2 polynomial fitted in centred, scaled coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub center: [f64; 2],
    pub scale: f64,
    /// Coefficients of `1, X, Y, X², XY, Y²` with `X = (x − cx)/s`, `Y = (y − cy)/s`.
    pub coeffs: [f64; 6],
    /// Largest `|u − fit|` over valid nodes divided by the largest `|u|`.
    pub deviation: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let xs = (x - self.center[0]) / self.scale;
        let ys = (y - self.center[1]) / self.scale;
        let c = &self.coeffs;
        c[0] + c[1] * xs + c[2] * ys + c[3] * xs * xs + c[4] * xs * ys + c[5] * ys * ys
    }
}

pub fn quadratic_fit(u: &ScalarField2D) -> Result<QuadraticFit, PdeError> {
    let g = u.grid;
    let nodes: Vec<(f64, f64, f64)> = u
        .valid_nodes()
        .map(|(i, j, v)| (g.x(i), g.y(j), v))
        .collect();
    if nodes.len() < 6 {
        return Err(PdeError::RankDeficientFit);
    }
    let center = [0.5 * (g.x0 + g.x_max()), 0.5 * (g.y0 + g.y_max())];
    let scale = 0.5 * (g.x_max() - g.x0).max(g.y_max() - g.y0);
    let mut a = Vec::with_capacity(nodes.len() * 6);
    let mut b = Vec::with_capacity(nodes.len());
    for &(x, y, v) in &nodes {
        let xs = (x - center[0]) / scale;
        let ys = (y - center[1]) / scale;
        a.extend_from_slice(&[1.0, xs, ys, xs * xs, xs * ys, ys * ys]);
        b.push(v);
    }
    let sol = least_squares(nodes.len(), 6, &a, &b, FIT_RANK_TOL)
        .map_err(|_| PdeError::RankDeficientFit)?;
    let mut fit = QuadraticFit {
        center,
        scale,
        coeffs: core::array::from_fn(|k| sol[k]),
        deviation: 0.0,
    };
    let umax = nodes.iter().fold(0.0f64, |acc, n| acc.max(fabs(n.2)));
    let dev = nodes
        .iter()
        .fold(0.0f64, |acc, &(x, y, v)| acc.max(fabs(v - fit.eval(x, y))));
    fit.deviation = if umax > 0.0 { dev / umax } else { dev };
    Ok(fit)
}

/// Normalised maximum deviation of `u` from its best quadratic fit.
pub fn quadratic_deviation(u: &ScalarField2D) -> Result<f64, PdeError> {
    quadratic_fit(u).map(|f| f.deviation)
}

/// Hypothesis diagnostics on the bottom edge of a half-plane window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    /// Ordinate of the bottom row.
    pub row_y: f64,
    /// `a0 + a1 x + a2 x²` fitted to the bottom row.
    pub row_coefficients: [f64; 3],
    /// Largest absolute deviation of the bottom row from that fit.
    pub row_deviation: f64,
    /// Ordinate of the first interior row, where the Laplacian is sampled.
    pub laplacian_row_y: f64,
    /// `sup |u_xx + u_yy|` over that row.
    pub laplacian_sup: f64,
}

pub fn boundary_bernstein_check(u: &ScalarField2D) -> Result<BoundaryReport, PdeError> {
    u.require_stencil_grid()?;
    let g = u.grid;
    let xc = 0.5 * (g.x0 + g.x_max());
    let s = 0.5 * (g.x_max() - g.x0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..g.nx {
        if u.is_valid(i, 0) {
            let xs = (g.x(i) - xc) / s;
            a.extend_from_slice(&[1.0, xs, xs * xs]);
            b.push(u.get(i, 0));
        }
    }
    let rows = b.len();
    let c = least_squares(rows, 3, &a, &b, FIT_RANK_TOL).map_err(|_| PdeError::RankDeficientFit)?;
    let row_deviation = (0..rows).fold(0.0f64, |acc, r| {
        let p = c[0] + c[1] * a[3 * r + 1] + c[2] * a[3 * r + 2];
        acc.max(fabs(b[r] - p))
    });
    let a2 = c[2] / (s * s);
    let a1 = c[1] / s - 2.0 * c[2] * xc / (s * s);
    let a0 = c[0] - c[1] * xc / s + c[2] * xc * xc / (s * s);
    let lap = laplacian_fd(u)?;
    let laplacian_sup = (0..g.nx)
        .filter(|&i| lap.is_valid(i, 1))
        .fold(0.0f64, |acc, i| acc.max(fabs(lap.get(i, 1))));
    Ok(BoundaryReport {
        row_y: g.y0,
        row_coefficients: [a0, a1, a2],
        row_deviation,
        laplacian_row_y: g.y(1),
        laplacian_sup,
    })
}
