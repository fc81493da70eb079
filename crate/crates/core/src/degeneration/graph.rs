//! Distance between two lifted surfaces, measured by writing one as a
//! normal graph over the other.
//!
//! For a reference node `(p, ξ)` the graph value is the residual
//! `r = (log_p q, P_{q→p} η − ξ) ∈ R⁶`, expressed in the orthonormal frame
//! `z_p ∂_x, z_p ∂_y, z_p ∂_z`, at the point `(q, η)` of the other lift that
//! minimises `|r|`. The other lift is interpolated biquadratically between
//! its samples and the minimiser is found by Gauss–Newton.

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, round, sqrt};
use serde::{Deserialize, Serialize};

use super::DegenerationError;
use crate::hyp3::{g_norm, log_map, parallel_transport, LiftedPatch};
use crate::linalg::{add3, scale3, sub3, Vec3};
use crate::ma_pde::Grid2D;

/// Parameter box `[s_min, s_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(s_min: f64, s_max: f64, t_min: f64, t_max: f64) -> Result<Self, DegenerationError> {
        let w = Self { s_min, s_max, t_min, t_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), DegenerationError> {
        let ok = [self.s_min, self.s_max, self.t_min, self.t_max].iter().all(|v| v.is_finite());
        if ok && self.s_min < self.s_max && self.t_min < self.t_max {
            Ok(())
        } else {
            Err(DegenerationError::BadParameter("window"))
        }
    }

    /// The window enlarged by `m` on every side.
    pub fn expanded(&self, m: f64) -> Self {
        Self {
            s_min: self.s_min - m,
            s_max: self.s_max + m,
            t_min: self.t_min - m,
            t_max: self.t_max + m,
        }
    }

    /// Grid of spacing `h` over the window.
    pub fn grid(&self, h: f64) -> Result<Grid2D, DegenerationError> {
        Grid2D::covering(self.s_min, self.s_max, self.t_min, self.t_max, h)
            .map_err(|_| DegenerationError::BadParameter("window grid"))
    }

    fn contains(&self, s: f64, t: f64, slack: f64) -> bool {
        s >= self.s_min - slack && s <= self.s_max + slack && t >= self.t_min - slack && t <= self.t_max + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDistance {
    /// `sup |f|` over the window.
    pub c0: f64,
    /// `sup (|∂_s f|² + |∂_t f|²)^{1/2}` over the window.
    pub c1: f64,
    /// Number of reference nodes inside the window.
    pub nodes: usize,
}

/// Relative step of the finite-difference Jacobian, in units of the other
/// grid spacing.
const JACOBIAN_STEP: f64 = 1e-6;
const MAX_ITER: usize = 50;
const STEP_TOL: f64 = 1e-13;

struct Interpolant<'a> {
    lift: &'a LiftedPatch,
}

impl Interpolant<'_> {
    fn bounds(&self) -> Window {
        let g = self.lift.grid;
        Window {
            s_min: g.x0,
            s_max: g.x_max(),
            t_min: g.y0,
            t_max: g.y_max(),
        }
    }

    fn weights(u: f64) -> [f64; 3] {
        [0.5 * u * (u - 1.0), 1.0 - u * u, 0.5 * u * (u + 1.0)]
    }

    fn centre(x: f64, x0: f64, h: f64, n: usize) -> (usize, f64) {
        let k = round((x - x0) / h).clamp(1.0, (n - 2) as f64) as usize;
        (k, (x - x0) / h - k as f64)
    }

    fn eval(&self, s: f64, t: f64) -> Option<(Vec3, Vec3)> {
        let g = self.lift.grid;
        let (ci, u) = Self::centre(s, g.x0, g.h, g.nx);
        let (cj, v) = Self::centre(t, g.y0, g.h, g.ny);
        let (wu, wv) = (Self::weights(u), Self::weights(v));
        let mut p = [0.0; 3];
        let mut e = [0.0; 3];
        for (b, wb) in wv.iter().enumerate() {
            for (a, wa) in wu.iter().enumerate() {
                let w = wa * wb;
                if w == 0.0 {
                    continue;
                }
                let n = g.idx(ci + a - 1, cj + b - 1);
                p = add3(p, scale3(w, self.lift.points[n]));
                e = add3(e, scale3(w, self.lift.fibers[n]));
            }
        }
        if p[2].is_nan() || p[2] <= 0.0 {
            return None;
        }
        let len = g_norm(p, e);
        if len.is_nan() || len <= 0.0 {
            return None;
        }
        if fabs(len - 1.0) > 1e-14 {
            e = scale3(1.0 / len, e);
        }
        Some((p, e))
    }
}

fn residual(p: Vec3, xi: Vec3, q: Vec3, eta: Vec3) -> [f64; 6] {
    let z = p[2];
    let h = scale3(1.0 / z, log_map(p, q));
    let v = scale3(1.0 / z, sub3(parallel_transport(q, p, eta), xi));
    [h[0], h[1], h[2], v[0], v[1], v[2]]
}

fn norm2(r: &[f64; 6]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

struct Solver<'a> {
    other: Interpolant<'a>,
    bounds: Window,
    h: f64,
}

impl Solver<'_> {
    fn r(&self, p: Vec3, xi: Vec3, x: [f64; 2]) -> Option<[f64; 6]> {
        self.other.eval(x[0], x[1]).map(|(q, eta)| residual(p, xi, q, eta))
    }

    fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0].clamp(self.bounds.s_min, self.bounds.s_max),
            x[1].clamp(self.bounds.t_min, self.bounds.t_max),
        ]
    }

    /// Gauss–Newton step `(JᵗJ)⁻¹ Jᵗ r` at `x`, or `None` if the normal
    /// matrix is singular.
    fn step(&self, p: Vec3, xi: Vec3, x: [f64; 2], r: &[f64; 6]) -> Option<[f64; 2]> {
        let d = JACOBIAN_STEP * self.h;
        let mut jac = [[0.0; 6]; 2];
        for (k, col) in jac.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[k] += d;
            xm[k] -= d;
            let (rp, rm) = (self.r(p, xi, xp)?, self.r(p, xi, xm)?);
            for m in 0..6 {
                col[m] = (rp[m] - rm[m]) / (2.0 * d);
            }
        }
        let dot = |a: &[f64; 6], b: &[f64; 6]| (0..6).map(|m| a[m] * b[m]).sum::<f64>();
        let (a, b, c) = (dot(&jac[0], &jac[0]), dot(&jac[0], &jac[1]), dot(&jac[1], &jac[1]));
        let (g0, g1) = (dot(&jac[0], r), dot(&jac[1], r));
        let det = a * c - b * b;
        if det.is_nan() || det <= 1e-14 * (a * c).max(1e-300) {
            return None;
        }
        Some([-(c * g0 - b * g1) / det, -(a * g1 - b * g0) / det])
    }

    /// Minimiser of `|r|²` starting from `x`; `None` if the iteration fails
    /// or the minimiser sits against the edge of the other lift.
    fn solve(&self, p: Vec3, xi: Vec3, start: [f64; 2]) -> Option<([f64; 2], [f64; 6])> {
        let mut x = start;
        let mut r = self.r(p, xi, x)?;
        if norm2(&r) == 0.0 {
            return Some((x, r));
        }
        for _ in 0..MAX_ITER {
            let dx = self.step(p, xi, x, &r)?;
            let e0 = norm2(&r);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-6 {
                let cand = self.clamp([x[0] + t * dx[0], x[1] + t * dx[1]]);
                if let Some(rc) = self.r(p, xi, cand) {
                    if norm2(&rc) <= e0 {
                        let shift = libm::hypot(cand[0] - x[0], cand[1] - x[1]);
                        x = cand;
                        r = rc;
                        moved = shift > STEP_TOL * self.h;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // an unconstrained step that leaves the box marks a boundary minimum
        if norm2(&r) > 0.0 {
            let dx = self.step(p, xi, x, &r)?;
            if !self.bounds.contains(x[0] + dx[0], x[1] + dx[1], 1e-8 * self.h) {
                return None;
            }
        }
        Some((x, r))
    }
}

pub fn graph_distance(
    reference: &LiftedPatch,
    other: &LiftedPatch,
    window: &Window,
) -> Result<GraphDistance, DegenerationError> {
    window.validate()?;
    let rg = reference.grid;
    let og = other.grid;
    let slack = 1e-9 * rg.h;
    let is: Vec<usize> = (0..rg.nx)
        .filter(|&i| rg.x(i) >= window.s_min - slack && rg.x(i) <= window.s_max + slack)
        .collect();
    let js: Vec<usize> = (0..rg.ny)
        .filter(|&j| rg.y(j) >= window.t_min - slack && rg.y(j) <= window.t_max + slack)
        .collect();
    if is.len() < 2 || js.len() < 2 {
        return Err(DegenerationError::BadParameter("window holds fewer than 2x2 reference nodes"));
    }
    let solver = Solver {
        other: Interpolant { lift: other },
        bounds: Interpolant { lift: other }.bounds(),
        h: og.h,
    };
    let (ni, nj) = (is.len(), js.len());
    let mut values = vec![[0.0f64; 6]; ni * nj];
    let mut params = vec![[0.0f64; 2]; ni * nj];
    for (b, &j) in js.iter().enumerate() {
        for (a, &i) in is.iter().enumerate() {
            let n = rg.idx(i, j);
            let (p, xi) = (reference.points[n], reference.fibers[n]);
            let warm = if a > 0 {
                Some(params[b * ni + a - 1])
            } else if b > 0 {
                Some(params[(b - 1) * ni])
            } else {
                None
            };
            let candidates: Vec<usize> = match warm {
                None => (0..og.len()).collect(),
                Some(x) => {
                    let ci = round((x[0] - og.x0) / og.h) as isize;
                    let cj = round((x[1] - og.y0) / og.h) as isize;
                    let mut c = Vec::with_capacity(25);
                    for dj in -2..=2isize {
                        for di in -2..=2isize {
                            let (ii, jj) = (ci + di, cj + dj);
                            if ii >= 0 && jj >= 0 && (ii as usize) < og.nx && (jj as usize) < og.ny {
                                c.push(og.idx(ii as usize, jj as usize));
                            }
                        }
                    }
                    c
                }
            };
            let mut best: Option<(f64, usize)> = None;
            for m in candidates {
                let e = norm2(&residual(p, xi, other.points[m], other.fibers[m]));
                if best.is_none_or(|(be, _)| e < be) {
                    best = Some((e, m));
                }
            }
            let not_graph = DegenerationError::NotAGraph { i, j };
            let (_, m) = best.ok_or(not_graph)?;
            let start = [og.x(m % og.nx), og.y(m / og.nx)];
            let (x, r) = solver.solve(p, xi, start).ok_or(not_graph)?;
            values[b * ni + a] = r;
            params[b * ni + a] = x;
        }
    }

    // the projection must be locally injective with a consistent orientation
    let mut orientation = 0.0f64;
    for b in 0..nj - 1 {
        for a in 0..ni - 1 {
            let x0 = params[b * ni + a];
            let xs = params[b * ni + a + 1];
            let xt = params[(b + 1) * ni + a];
            let det = (xs[0] - x0[0]) * (xt[1] - x0[1]) - (xs[1] - x0[1]) * (xt[0] - x0[0]);
            let scale = rg.h * rg.h;
            if fabs(det) < 1e-8 * scale || det * orientation < 0.0 {
                return Err(DegenerationError::NotAGraph { i: is[a], j: js[b] });
            }
            orientation = det;
        }
    }

    let mut c0 = 0.0f64;
    let mut c1 = 0.0f64;
    let at = |a: usize, b: usize| &values[b * ni + a];
    let diff = |fwd: &[f64; 6], bwd: &[f64; 6], span: f64| {
        let mut d = [0.0; 6];
        for m in 0..6 {
            d[m] = (fwd[m] - bwd[m]) / span;
        }
        d
    };
    for b in 0..nj {
        for a in 0..ni {
            c0 = c0.max(sqrt(norm2(at(a, b))));
            let (lo, hi) = (a.saturating_sub(1), (a + 1).min(ni - 1));
            let ds = diff(at(hi, b), at(lo, b), (hi - lo) as f64 * rg.h);
            let (lo, hi) = (b.saturating_sub(1), (b + 1).min(nj - 1));
            let dt = diff(at(a, hi), at(a, lo), (hi - lo) as f64 * rg.h);
            c1 = c1.max(sqrt(norm2(&ds) + norm2(&dt)));
        }
    }
    Ok(GraphDistance { c0, c1, nodes: ni * nj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp3::{flat_catalog, gauss_lift, tube_surface, CatalogKind, GeodesicH3};
    use libm::log;

    fn lift_of(kind: CatalogKind, w: &Window, h: f64) -> LiftedPatch {
        gauss_lift(&flat_catalog(kind, w.grid(h).unwrap()).unwrap()).unwrap().lifted()
    }

    #[test]
    fn identical_lifts_are_at_distance_zero() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let ws = Window::new(0.5, 2.5, -1.0, 1.0).unwrap();
        for (kind, win) in [
            (CatalogKind::Horosphere { c: 1.0 }, w),
            (CatalogKind::Equidistant { d: 0.5 }, w),
            (CatalogKind::GeodesicSphere { r: 1.0 }, ws),
            (CatalogKind::GeodesicPlane, w),
        ] {
            let l = lift_of(kind, &win, 0.125);
            let g = graph_distance(&l, &l, &win).unwrap();
            assert_eq!((g.c0, g.c1), (0.0, 0.0), "{kind:?}");
        }
    }

    #[test]
    fn horosphere_offsets_give_log_height() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let r = lift_of(CatalogKind::Horosphere { c: 1.0 }, &w, 0.125);
        for eps in [0.1, 0.01, 0.001] {
            let o = lift_of(CatalogKind::Horosphere { c: 1.0 + eps }, &w.expanded(0.5), 0.125);
            let g = graph_distance(&r, &o, &w).unwrap();
            assert!((g.c0 - log(1.0 + eps)).abs() < 1e-9 * (1.0 + eps), "{eps} {}", g.c0);
            assert!(g.c1 < 1e-6);
        }
    }

    #[test]
    fn equidistant_to_tube_distance_is_the_offset() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let big = w.expanded(0.5);
        let tube = tube_surface(GeodesicH3::Vertical { x0: 0.0, y0: 0.0 }, big.grid(1.0 / 16.0).unwrap())
            .unwrap()
            .lifted();
        let mut last = f64::INFINITY;
        for d in [0.5, 0.1, 0.02] {
            let r = lift_of(CatalogKind::Equidistant { d }, &w, 1.0 / 16.0);
            let g = graph_distance(&r, &tube, &w).unwrap();
            assert!((g.c0 - d).abs() < 1e-3 * d.max(0.1), "{d} {}", g.c0);
            assert!(g.c0 < last);
            last = g.c0;
        }
    }

    #[test]
    fn other_lift_too_small_is_not_a_graph() {
        let w = Window::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let r = lift_of(CatalogKind::Horosphere { c: 1.0 }, &w, 0.125);
        let small = Window::new(-0.5, 0.5, -0.5, 0.5).unwrap();
        let o = lift_of(CatalogKind::Horosphere { c: 1.1 }, &small, 0.125);
        assert!(matches!(graph_distance(&r, &o, &w), Err(DegenerationError::NotAGraph { .. })));
        assert!(Window::new(1.0, 0.0, 0.0, 1.0).is_err());
    }
}
