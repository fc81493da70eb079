//! Damped Newton iteration for the Dirichlet problem `det Hess_h u = 1`.

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, ldexp};
use serde::{Deserialize, Serialize};

use super::{positivity_field, Grid2D, PdeError, Positivity, ScalarField2D};
use crate::linalg::{sym2_eigenvalues, sym2_eigenvector, BandMatrix};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once `max |det Hess_h u − 1| ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Eigenvalue floor applied to Hessians when building the Jacobian.
    pub convexity_floor: f64,
    /// Smallest damping factor tried by the line search.
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            convexity_floor: tol::CONVEXITY_FLOOR,
            min_step: ldexp(1.0, -20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonSolution {
    pub u: ScalarField2D,
    pub iterations: usize,
    pub residual: f64,
    /// Residual before each Newton step, then the final one.
    pub history: Vec<f64>,
    /// Whether every interior discrete Hessian is positive definite and the
    /// restriction to each edge has non-negative second differences.
    pub convex: bool,
}

/// Maps interior nodes to unknowns, running along the shorter side so the
/// band stays narrow.
struct Numbering {
    grid: Grid2D,
    ni: usize,
    nj: usize,
    x_fast: bool,
}

impl Numbering {
    fn new(grid: Grid2D) -> Self {
        let ni = grid.nx - 2;
        let nj = grid.ny - 2;
        Self {
            grid,
            ni,
            nj,
            x_fast: ni <= nj,
        }
    }

    fn len(&self) -> usize {
        self.ni * self.nj
    }

    fn bandwidth(&self) -> usize {
        if self.x_fast {
            self.ni + 1
        } else {
            self.nj + 1
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        if self.x_fast {
            (j - 1) * self.ni + (i - 1)
        } else {
            (i - 1) * self.nj + (j - 1)
        }
    }

    fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let g = self.grid;
        (1..g.ny - 1).flat_map(move |j| (1..g.nx - 1).map(move |i| (i, j)))
    }
}

/// Coefficients `(c_xx, c_xy, c_yy)` of a linear operator
/// `c_xx D_xx + c_xy D_xy + c_yy D_yy` at one node.
type Coeffs = (f64, f64, f64);

fn hessian_at(u: &ScalarField2D, i: usize, j: usize) -> (f64, f64, f64) {
    let ih2 = 1.0 / (u.grid.h * u.grid.h);
    let c = u.get(i, j);
    let xx = (u.get(i + 1, j) - 2.0 * c + u.get(i - 1, j)) * ih2;
    let yy = (u.get(i, j + 1) - 2.0 * c + u.get(i, j - 1)) * ih2;
    let xy = (u.get(i + 1, j + 1) - u.get(i + 1, j - 1) - u.get(i - 1, j + 1) + u.get(i - 1, j - 1))
        * 0.25
        * ih2;
    (xx, xy, yy)
}

fn residual(u: &ScalarField2D, num: &Numbering) -> Vec<f64> {
    let mut f = vec![0.0; num.len()];
    for (i, j) in num.interior() {
        let (xx, xy, yy) = hessian_at(u, i, j);
        f[num.index(i, j)] = xx * yy - xy * xy - 1.0;
    }
    f
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(fabs(*x)))
}

/// Hessian with eigenvalues raised to at least `floor`.
fn project(h: (f64, f64, f64), floor: f64) -> (f64, f64, f64) {
    let (a, b, c) = h;
    let (lo, hi) = sym2_eigenvalues(a, b, c);
    if lo >= floor {
        return h;
    }
    let v = sym2_eigenvector(a, b, c, hi);
    let w = [-v[1], v[0]];
    let (l1, l2) = (hi.max(floor), lo.max(floor));
    (
        l1 * v[0] * v[0] + l2 * w[0] * w[0],
        l1 * v[0] * v[1] + l2 * w[0] * w[1],
        l1 * v[1] * v[1] + l2 * w[1] * w[1],
    )
}

fn assemble(num: &Numbering, coeffs: &[Coeffs]) -> BandMatrix {
    let g = num.grid;
    let bw = num.bandwidth();
    let mut m = BandMatrix::new(num.len(), bw, bw);
    let ih2 = 1.0 / (g.h * g.h);
    for (i, j) in num.interior() {
        let row = num.index(i, j);
        let (cxx, cxy, cyy) = coeffs[row];
        let mut put = |ii: usize, jj: usize, v: f64| {
            if !g.is_edge(ii, jj) {
                m.add(row, num.index(ii, jj), v);
            }
        };
        put(i, j, -2.0 * (cxx + cyy) * ih2);
        put(i + 1, j, cxx * ih2);
        put(i - 1, j, cxx * ih2);
        put(i, j + 1, cyy * ih2);
        put(i, j - 1, cyy * ih2);
        let q = 0.25 * cxy * ih2;
        put(i + 1, j + 1, q);
        put(i - 1, j - 1, q);
        put(i + 1, j - 1, -q);
        put(i - 1, j + 1, -q);
    }
    m
}

/// Poisson start `Δu = 2` with the given boundary values.
fn poisson_start(boundary: &ScalarField2D, num: &Numbering) -> Result<ScalarField2D, PdeError> {
    let mut u = boundary.clone();
    u.mask = None;
    for (i, j) in num.interior() {
        u.set(i, j, 0.0);
    }
    let coeffs = vec![(1.0, 0.0, 1.0); num.len()];
    let lu = assemble(num, &coeffs)
        .factor()
        .map_err(|_| PdeError::LinearSolveFailure)?;
    let mut rhs = vec![0.0; num.len()];
    for (i, j) in num.interior() {
        let (xx, _, yy) = hessian_at(&u, i, j);
        rhs[num.index(i, j)] = 2.0 - (xx + yy);
    }
    lu.solve(&mut rhs);
    for (i, j) in num.interior() {
        u.set(i, j, rhs[num.index(i, j)]);
    }
    Ok(u)
}

fn edges_convex(u: &ScalarField2D) -> bool {
    let g = u.grid;
    let floor = -roundoff_slack(u);
    let row_ok = |j: usize| (1..g.nx - 1).all(|i| u.get(i + 1, j) - 2.0 * u.get(i, j) + u.get(i - 1, j) >= floor);
    let col_ok = |i: usize| (1..g.ny - 1).all(|j| u.get(i, j + 1) - 2.0 * u.get(i, j) + u.get(i, j - 1) >= floor);
    row_ok(0) && row_ok(g.ny - 1) && col_ok(0) && col_ok(g.nx - 1)
}

/// Roundoff allowance for second differences of `u`.
fn roundoff_slack(u: &ScalarField2D) -> f64 {
    let scale = u.values.iter().fold(0.0f64, |acc, v| acc.max(fabs(*v)));
    64.0 * f64::EPSILON * scale.max(1.0)
}

/// Solves `det Hess_h u = 1` inside the grid with `u` fixed to `boundary`
/// on the edge nodes. Interior values of `boundary` are ignored.
///
/// The Jacobian uses the cofactors of the Hessian projected to eigenvalues
/// at least `convexity_floor`. Steps are halved until the residual decreases
/// by the Armijo factor `1 − 1e-4 t`.
pub fn newton_ma_solve(
    boundary: &ScalarField2D,
    init: Option<&ScalarField2D>,
    opts: &NewtonOptions,
) -> Result<NewtonSolution, PdeError> {
    boundary.require_stencil_grid()?;
    let grid = boundary.grid;
    let num = Numbering::new(grid);
    let mut u = match init {
        Some(f) => {
            if f.grid != grid {
                return Err(PdeError::ShapeMismatch);
            }
            let mut u = f.clone();
            u.mask = None;
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    if grid.is_edge(i, j) {
                        u.set(i, j, boundary.get(i, j));
                    }
                }
            }
            u
        }
        None => poisson_start(boundary, &num)?,
    };
    let mut history = Vec::new();
    let mut f = residual(&u, &num);
    let mut r = max_abs(&f);
    let mut iterations = 0;
    loop {
        history.push(r);
        if r <= opts.tol {
            break;
        }
        if iterations == opts.max_iter {
            return Err(PdeError::NotConverged { iterations, residual: r });
        }
        let mut coeffs: Vec<Coeffs> = vec![(0.0, 0.0, 0.0); num.len()];
        for (i, j) in num.interior() {
            let (xx, xy, yy) = project(hessian_at(&u, i, j), opts.convexity_floor);
            coeffs[num.index(i, j)] = (yy, -2.0 * xy, xx);
        }
        let lu = assemble(&num, &coeffs)
            .factor()
            .map_err(|_| PdeError::LinearSolveFailure)?;
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        lu.solve(&mut delta);
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (i, j) in num.interior() {
                let k = grid.idx(i, j);
                trial.values[k] += t * delta[num.index(i, j)];
            }
            let ft = residual(&trial, &num);
            let rt = max_abs(&ft);
            if rt <= (1.0 - 1e-4 * t) * r {
                u = trial;
                f = ft;
                r = rt;
                break;
            }
            t *= 0.5;
            if t < opts.min_step {
                return Err(PdeError::NotConverged { iterations, residual: r });
            }
        }
        iterations += 1;
    }
    let convex = positivity_field(&u)?.all(Positivity::Positive) && edges_convex(&u);
    Ok(NewtonSolution {
        u,
        iterations,
        residual: r,
        history,
        convex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::RefinementStudy;
    use crate::ma_pde::counterexample_potential;

    #[test]
    fn recovers_unit_quadratic() {
        let g = Grid2D::covering(0.0, 1.0, 0.0, 1.0, 1.0 / 16.0).unwrap();
        let q = |x: f64, y: f64| 0.5 * (x * x + y * y);
        let b = ScalarField2D::from_fn(g, q);
        let sol = newton_ma_solve(&b, None, &NewtonOptions::default()).unwrap();
        assert!(sol.u.max_error_vs(q) <= 1e-8);
        assert!(sol.convex);
    }

    #[test]
    fn recovers_sheared_quadratic_from_poor_start() {
        let g = Grid2D::covering(-1.0, 1.0, 0.0, 1.0, 1.0 / 16.0).unwrap();
        // det [[2, 1], [1, 1]] = 1
        let q = |x: f64, y: f64| x * x + x * y + 0.5 * y * y;
        let b = ScalarField2D::from_fn(g, q);
        let sol = newton_ma_solve(&b, None, &NewtonOptions::default()).unwrap();
        assert!(sol.u.max_error_vs(q) <= 1e-8, "{}", sol.u.max_error_vs(q));
        assert!(sol.iterations >= 1);
    }

    #[test]
    fn concave_data_is_reported() {
        let g = Grid2D::covering(0.0, 1.0, 0.0, 1.0, 1.0 / 8.0).unwrap();
        let b = ScalarField2D::from_fn(g, |x, y| -0.5 * (x * x + y * y));
        match newton_ma_solve(&b, None, &NewtonOptions::default()) {
            Err(PdeError::NotConverged { .. }) => {}
            Ok(sol) => assert!(!sol.convex),
            Err(e) => panic!("{e:?}"),
        }
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let mut g = Grid2D::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 8.0).unwrap();
        let coarse = g;
        let (mut hs, mut errs) = (vec![], vec![]);
        for _ in 0..3 {
            let b = ScalarField2D::from_fn(g, counterexample_potential);
            let sol = newton_ma_solve(&b, None, &NewtonOptions::default()).unwrap();
            hs.push(g.h);
            errs.push(sol.u.max_error_on_common_nodes(&coarse, counterexample_potential));
            g = g.refined();
        }
        let s = RefinementStudy::new(hs, errs);
        assert!(s.min_order() >= 1.8, "{s:?}");
    }
}
