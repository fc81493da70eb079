//! Parametrised surfaces, their fundamental forms and Gauss lifts.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, cosh, exp, fabs, sin, sinh, sqrt, tanh};
use serde::{Deserialize, Serialize};

use super::space::{christoffel, g_norm, metric, parallel_transport, HPoint, Isometry};
use super::{sasaki_ma_structure, GeometryError, UnitTangent};
use crate::linalg::{add3, cross3, norm3, scale3, sub3, Vec3};
use crate::ma_linear::{invariance_defect, Mat2, Plane4};
use crate::ma_pde::{Grid2D, ScalarField2D};
use crate::tol;

/// Closed-form surfaces with `K = 1` (and the totally geodesic plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CatalogKind {
    /// `{z = c}`.
    Horosphere { c: f64 },
    /// Points at distance `d` from the vertical geodesic through the origin.
    Equidistant { d: f64 },
    /// Sphere of radius `r` about `(0, 0, 1)`.
    GeodesicSphere { r: f64 },
    /// The vertical half-plane `{y = 0}`.
    GeodesicPlane,
}

impl CatalogKind {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        match *self {
            CatalogKind::Horosphere { c } if !ok(c) => Err(GeometryError::BadParameter("horosphere height")),
            CatalogKind::Equidistant { d } if !ok(d) => Err(GeometryError::BadParameter("equidistant distance")),
            CatalogKind::GeodesicSphere { r } if !ok(r) => Err(GeometryError::BadParameter("sphere radius")),
            _ => Ok(()),
        }
    }

    pub fn point(&self, s: f64, t: f64) -> Vec3 {
        match *self {
            CatalogKind::Horosphere { c } => [s, t, c],
            CatalogKind::Equidistant { d } => {
                let e = exp(s);
                let a = tanh(d);
                [e * a * cos(t), e * a * sin(t), e / cosh(d)]
            }
            CatalogKind::GeodesicSphere { r } => {
                let (sr, cr) = (sinh(r), cosh(r));
                [sr * sin(s) * cos(t), sr * sin(s) * sin(t), cr + sr * cos(s)]
            }
            CatalogKind::GeodesicPlane => [s, 0.0, exp(t)],
        }
    }

    /// Sign making the normal point out of the convex side.
    pub fn orientation(&self) -> i8 {
        match self {
            CatalogKind::Horosphere { .. } | CatalogKind::Equidistant { .. } => -1,
            CatalogKind::GeodesicSphere { .. } | CatalogKind::GeodesicPlane => 1,
        }
    }

    /// Shape operator in the parameter basis `(∂_s, ∂_t)`.
    pub fn expected_shape(&self) -> Mat2 {
        match *self {
            CatalogKind::Horosphere { .. } => Mat2::identity(),
            CatalogKind::Equidistant { d } => Mat2::diag(tanh(d), 1.0 / tanh(d)),
            CatalogKind::GeodesicSphere { r } => Mat2::identity().scale(1.0 / tanh(r)),
            CatalogKind::GeodesicPlane => Mat2::zero(),
        }
    }

    pub fn expected_curvature(&self) -> f64 {
        self.expected_shape().det()
    }
}

/// Uniformly sampled immersion of a parameter rectangle into H³.
///
/// Positions are also sampled on two ghost layers around the grid so that
/// every derived quantity uses centred differences, edges included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePatch {
    pub grid: Grid2D,
    pub orientation: i8,
    pub positions: Vec<HPoint>,
    pub normals: Vec<UnitTangent>,
    pub kind: Option<CatalogKind>,
    pub motion: Isometry,
    ghost: Vec<Vec3>,
}

#[derive(Clone, Copy)]
struct Frame {
    p: Vec3,
    es: Vec3,
    et: Vec3,
    nu: Vec3,
}

impl SurfacePatch {
    /// Samples `f` over `grid` and the ghost layers.
    pub fn from_map(grid: Grid2D, orientation: i8, f: impl Fn(f64, f64) -> Vec3) -> Result<Self, GeometryError> {
        if orientation != 1 && orientation != -1 {
            return Err(GeometryError::BadParameter("orientation"));
        }
        let (ex, ey) = (grid.nx + 4, grid.ny + 4);
        let mut ghost = Vec::with_capacity(ex * ey);
        for j in 0..ey {
            for i in 0..ex {
                let s = grid.x0 + (i as f64 - 2.0) * grid.h;
                let t = grid.y0 + (j as f64 - 2.0) * grid.h;
                let p = f(s, t);
                HPoint::from_vec(p)?;
                ghost.push(p);
            }
        }
        let mut patch = Self {
            grid,
            orientation,
            positions: Vec::with_capacity(grid.len()),
            normals: Vec::with_capacity(grid.len()),
            kind: None,
            motion: Isometry::Identity,
            ghost,
        };
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let fr = patch.frame(i as isize, j as isize)?;
                let base = HPoint::from_vec(fr.p)?;
                patch.positions.push(base);
                patch.normals.push(UnitTangent { base, vector: fr.nu });
            }
        }
        Ok(patch)
    }

    fn ghost_at(&self, i: isize, j: isize) -> Vec3 {
        let ex = self.grid.nx + 4;
        self.ghost[(j + 2) as usize * ex + (i + 2) as usize]
    }

    /// Tangents and normal at node `(i, j)`, valid for `-1 ≤ i ≤ nx` and
    /// `-1 ≤ j ≤ ny`.
    fn frame(&self, i: isize, j: isize) -> Result<Frame, GeometryError> {
        let inv = 0.5 / self.grid.h;
        let p = self.ghost_at(i, j);
        let es = scale3(inv, sub3(self.ghost_at(i + 1, j), self.ghost_at(i - 1, j)));
        let et = scale3(inv, sub3(self.ghost_at(i, j + 1), self.ghost_at(i, j - 1)));
        let z = p[2];
        // singular values of the tangent map in an orthonormal frame
        let (a, b, c) = (
            crate::linalg::dot3(es, es) / (z * z),
            crate::linalg::dot3(es, et) / (z * z),
            crate::linalg::dot3(et, et) / (z * z),
        );
        let (lo, _) = crate::linalg::sym2_eigenvalues(a, b, c);
        let degenerate = || GeometryError::DegenerateImmersion {
            i: i.max(0) as usize,
            j: j.max(0) as usize,
        };
        if lo.is_nan() || lo <= 0.0 || sqrt(lo) < tol::IMMERSION {
            return Err(degenerate());
        }
        let n = cross3(es, et);
        let ne = norm3(n);
        if ne.is_nan() || ne <= 0.0 {
            return Err(degenerate());
        }
        let nu = scale3(self.orientation as f64 * z / ne, n);
        Ok(Frame { p, es, et, nu })
    }

    /// Same parameter grid, with every point moved by `iso`.
    pub fn moved(&self, iso: Isometry) -> Result<Self, GeometryError> {
        let grid = self.grid;
        let ex = grid.nx + 4;
        let ghost = self.ghost.clone();
        let mut out = Self::from_map(grid, self.orientation, |s, t| {
            let i = libm::round((s - grid.x0) / grid.h + 2.0) as usize;
            let j = libm::round((t - grid.y0) / grid.h + 2.0) as usize;
            iso.apply(ghost[j * ex + i])
        })?;
        out.kind = self.kind;
        out.motion = iso;
        Ok(out)
    }

    /// Largest `|g(ν, e_s)|, |g(ν, e_t)|` over the grid.
    pub fn normal_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.ny as isize {
            for i in 0..self.grid.nx as isize {
                if let Ok(f) = self.frame(i, j) {
                    worst = worst.max(fabs(metric(f.p, f.nu, f.es)) / g_norm(f.p, f.es));
                    worst = worst.max(fabs(metric(f.p, f.nu, f.et)) / g_norm(f.p, f.et));
                }
            }
        }
        worst
    }

    /// `(s, t)` of node `(i, j)`.
    pub fn parameter(&self, i: usize, j: usize) -> (f64, f64) {
        (self.grid.x(i), self.grid.y(j))
    }
}

/// Catalog patch sampled on `grid` in `(s, t)`.
pub fn flat_catalog(kind: CatalogKind, grid: Grid2D) -> Result<SurfacePatch, GeometryError> {
    kind.validate()?;
    let mut p = SurfacePatch::from_map(grid, kind.orientation(), |s, t| kind.point(s, t))?;
    p.kind = Some(kind);
    Ok(p)
}

/// Node-wise fundamental forms. `second[n].m[a][b] = g(e_a, ∇_b ν)` so that
/// `shape = first⁻¹ · second` and `∇_{e_b} ν = Σ_a e_a shape[a][b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub grid: Grid2D,
    pub first: Vec<Mat2>,
    pub second: Vec<Mat2>,
    pub third: Vec<Mat2>,
    pub shape: Vec<Mat2>,
    pub curvature: ScalarField2D,
}

impl FundamentalForms {
    /// Operator norm of the shape operator with respect to `I` at node `n`.
    pub fn second_norm(&self, n: usize) -> f64 {
        let a = &self.shape[n];
        let half = 0.5 * a.trace();
        let disc = (half * half - a.det()).max(0.0);
        fabs(half) + sqrt(disc)
    }

    pub fn max_second_norm(&self) -> f64 {
        (0..self.shape.len()).map(|n| self.second_norm(n)).fold(0.0, f64::max)
    }

    /// Largest `|II_st − II_ts|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.second
            .iter()
            .map(|m| fabs(m.m[0][1] - m.m[1][0]))
            .fold(0.0, f64::max)
    }
}

fn covariant_normal_derivatives(patch: &SurfacePatch, i: isize, j: isize, f: &Frame) -> Result<[Vec3; 2], GeometryError> {
    let inv = 0.5 / patch.grid.h;
    let ds = scale3(inv, sub3(patch.frame(i + 1, j)?.nu, patch.frame(i - 1, j)?.nu));
    let dt = scale3(inv, sub3(patch.frame(i, j + 1)?.nu, patch.frame(i, j - 1)?.nu));
    Ok([
        add3(ds, christoffel(f.p, f.es, f.nu)),
        add3(dt, christoffel(f.p, f.et, f.nu)),
    ])
}

pub fn fundamental_forms(patch: &SurfacePatch) -> Result<FundamentalForms, GeometryError> {
    fundamental_forms_scaled(patch, 1.0)
}

/// Fundamental forms for the rescaled metric `B² g`, in which the unit
/// normal is `ν / B` and the Levi-Civita connection is unchanged.
pub fn fundamental_forms_scaled(patch: &SurfacePatch, b: f64) -> Result<FundamentalForms, GeometryError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(GeometryError::BadParameter("metric scale"));
    }
    let grid = patch.grid;
    let b2 = b * b;
    let gb = |p: Vec3, u: Vec3, v: Vec3| b2 * metric(p, u, v);
    let mut first = Vec::with_capacity(grid.len());
    let mut second = Vec::with_capacity(grid.len());
    let mut third = Vec::with_capacity(grid.len());
    let mut shape = Vec::with_capacity(grid.len());
    let mut k = Vec::with_capacity(grid.len());
    for j in 0..grid.ny as isize {
        for i in 0..grid.nx as isize {
            let f = patch.frame(i, j)?;
            let dn = covariant_normal_derivatives(patch, i, j, &f)?.map(|v| scale3(1.0 / b, v));
            let e = [f.es, f.et];
            let one = Mat2 {
                m: [[gb(f.p, e[0], e[0]), gb(f.p, e[0], e[1])], [gb(f.p, e[1], e[0]), gb(f.p, e[1], e[1])]],
            };
            let two = Mat2 {
                m: [[gb(f.p, e[0], dn[0]), gb(f.p, e[0], dn[1])], [gb(f.p, e[1], dn[0]), gb(f.p, e[1], dn[1])]],
            };
            let three = Mat2 {
                m: [[gb(f.p, dn[0], dn[0]), gb(f.p, dn[0], dn[1])], [gb(f.p, dn[1], dn[0]), gb(f.p, dn[1], dn[1])]],
            };
            let a = one
                .inverse()
                .ok_or(GeometryError::DegenerateImmersion { i: i as usize, j: j as usize })?
                .mul(&two);
            k.push(a.det());
            first.push(one);
            second.push(two);
            third.push(three);
            shape.push(a);
        }
    }
    let curvature = ScalarField2D::new(grid, k).map_err(|_| GeometryError::BadParameter("grid"))?;
    Ok(FundamentalForms {
        grid,
        first,
        second,
        third,
        shape,
        curvature,
    })
}

/// Gauss curvature of the induced metric by the Brioschi formula applied
/// to centred differences of `I`. Edge nodes are masked out.
pub fn intrinsic_curvature(forms: &FundamentalForms) -> ScalarField2D {
    let g = forms.grid;
    let h = g.h;
    let at = |i: usize, j: usize| forms.first[g.idx(i, j)];
    let mut values = vec![0.0; g.len()];
    let mut mask = vec![false; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let c = at(i, j);
            let (e, f, gg) = (c.m[0][0], c.m[0][1], c.m[1][1]);
            let d_u = |k: usize, l: usize| (at(i + 1, j).m[k][l] - at(i - 1, j).m[k][l]) / (2.0 * h);
            let d_v = |k: usize, l: usize| (at(i, j + 1).m[k][l] - at(i, j - 1).m[k][l]) / (2.0 * h);
            let d_uu = |k: usize, l: usize| (at(i + 1, j).m[k][l] - 2.0 * c.m[k][l] + at(i - 1, j).m[k][l]) / (h * h);
            let d_vv = |k: usize, l: usize| (at(i, j + 1).m[k][l] - 2.0 * c.m[k][l] + at(i, j - 1).m[k][l]) / (h * h);
            let d_uv = |k: usize, l: usize| {
                (at(i + 1, j + 1).m[k][l] - at(i + 1, j - 1).m[k][l] - at(i - 1, j + 1).m[k][l]
                    + at(i - 1, j - 1).m[k][l])
                    / (4.0 * h * h)
            };
            let (eu, ev) = (d_u(0, 0), d_v(0, 0));
            let (fu, fv) = (d_u(0, 1), d_v(0, 1));
            let (gu, gv) = (d_u(1, 1), d_v(1, 1));
            let top = -0.5 * d_vv(0, 0) + d_uv(0, 1) - 0.5 * d_uu(1, 1);
            let m1 = [[top, 0.5 * eu, fu - 0.5 * ev], [fv - 0.5 * gu, e, f], [0.5 * gv, f, gg]];
            let m2 = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, gg]];
            let det3 = |m: [[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let w = e * gg - f * f;
            values[g.idx(i, j)] = (det3(m1) - det3(m2)) / (w * w);
            mask[g.idx(i, j)] = true;
        }
    }
    ScalarField2D::new(g, values)
        .and_then(|f| f.with_mask(mask))
        .expect("field shape matches its grid")
}

/// Gauss lift data at one node: the unit normal and the horizontal and
/// vertical parts of the lift's two parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftNode {
    pub xi: UnitTangent,
    pub horizontal: [Vec3; 2],
    pub vertical: [Vec3; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussLift {
    pub grid: Grid2D,
    pub nodes: Vec<LiftNode>,
    /// Largest hyperbolic norm of `vertical − De·A·∂` over nodes and both
    /// directions, with `A` taken from [`fundamental_forms`].
    pub decomposition_defect: f64,
}

/// Points and unit vectors of a surface in the unit tangent bundle,
/// sampled over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedPatch {
    pub grid: Grid2D,
    pub points: Vec<Vec3>,
    pub fibers: Vec<Vec3>,
}

impl GaussLift {
    pub fn lifted(&self) -> LiftedPatch {
        LiftedPatch {
            grid: self.grid,
            points: self.nodes.iter().map(|n| n.xi.base.to_vec()).collect(),
            fibers: self.nodes.iter().map(|n| n.xi.vector).collect(),
        }
    }
}

/// The lift `ê = ν_e`. Vertical parts come from parallel transporting the
/// neighbouring normals back to the node before differencing.
pub fn gauss_lift(patch: &SurfacePatch) -> Result<GaussLift, GeometryError> {
    let forms = fundamental_forms(patch)?;
    let grid = patch.grid;
    let inv = 0.5 / grid.h;
    let mut nodes = Vec::with_capacity(grid.len());
    let mut worst = 0.0f64;
    for j in 0..grid.ny as isize {
        for i in 0..grid.nx as isize {
            let f = patch.frame(i, j)?;
            let moved = |di: isize, dj: isize| -> Result<Vec3, GeometryError> {
                let q = patch.frame(i + di, j + dj)?;
                Ok(parallel_transport(q.p, f.p, q.nu))
            };
            let vs = scale3(inv, sub3(moved(1, 0)?, moved(-1, 0)?));
            let vt = scale3(inv, sub3(moved(0, 1)?, moved(0, -1)?));
            let a = forms.shape[grid.idx(i as usize, j as usize)];
            for (b, v) in [vs, vt].into_iter().enumerate() {
                let predicted = add3(scale3(a.m[0][b], f.es), scale3(a.m[1][b], f.et));
                worst = worst.max(g_norm(f.p, sub3(v, predicted)));
            }
            nodes.push(LiftNode {
                xi: UnitTangent {
                    base: HPoint::from_vec(f.p)?,
                    vector: f.nu,
                },
                horizontal: [f.es, f.et],
                vertical: [vs, vt],
            });
        }
    }
    Ok(GaussLift {
        grid,
        nodes,
        decomposition_defect: worst,
    })
}

/// `I + III` at every node.
pub fn quasicompleteness_metric(patch: &SurfacePatch) -> Result<Vec<Mat2>, GeometryError> {
    let forms = fundamental_forms(patch)?;
    Ok(forms.first.iter().zip(&forms.third).map(|(a, b)| a.add(b)).collect())
}

/// Pullback of the Sasaki metric under the lift, from the lift's own
/// horizontal and vertical parts.
pub fn sasaki_pullback(lift: &GaussLift) -> Vec<Mat2> {
    lift.nodes
        .iter()
        .map(|n| {
            let p = n.xi.base.to_vec();
            let g = |a: usize, b: usize| {
                metric(p, n.horizontal[a], n.horizontal[b]) + metric(p, n.vertical[a], n.vertical[b])
            };
            Mat2::new(g(0, 0), g(0, 1), g(1, 0), g(1, 1))
        })
        .collect()
}

/// Defects of the Gauss lift against the Monge–Ampère structure with
/// log-curvature `log_curv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftResidual {
    /// `|K − e^{2 log_curv}|`.
    pub curvature: ScalarField2D,
    /// `|II_st − II_ts|`.
    pub symmetry: ScalarField2D,
    /// Failure of the lift's tangent plane to be invariant under the
    /// structure with the reciprocal log-curvature `−log_curv`.
    pub plane: ScalarField2D,
}

impl LiftResidual {
    pub fn max_curvature(&self) -> f64 {
        self.curvature.max_abs()
    }
}

pub fn jholo_lift_residual(
    patch: &SurfacePatch,
    log_curv: impl Fn(&UnitTangent) -> f64,
) -> Result<LiftResidual, GeometryError> {
    let forms = fundamental_forms(patch)?;
    let lift = gauss_lift(patch)?;
    let grid = patch.grid;
    let mut curv = Vec::with_capacity(grid.len());
    let mut sym = Vec::with_capacity(grid.len());
    let mut plane = Vec::with_capacity(grid.len());
    for (n, node) in lift.nodes.iter().enumerate() {
        let phi = log_curv(&node.xi);
        curv.push(fabs(forms.curvature.values[n] - exp(2.0 * phi)));
        let ii = forms.second[n];
        sym.push(fabs(ii.m[0][1] - ii.m[1][0]));
        let sp = sasaki_ma_structure(&node.xi, -phi)?;
        let a = forms.shape[n];
        let e = node.horizontal;
        let vert = |b: usize| add3(scale3(a.m[0][b], e[0]), scale3(a.m[1][b], e[1]));
        let u = sp.coordinates(e[0], vert(0));
        let v = sp.coordinates(e[1], vert(1));
        plane.push(match Plane4::from_vectors(u, v) {
            Ok(pl) => invariance_defect(&pl, &sp.j_phi),
            Err(_) => f64::INFINITY,
        });
    }
    let mk = |v: Vec<f64>| ScalarField2D::new(grid, v).map_err(|_| GeometryError::BadParameter("grid"));
    Ok(LiftResidual {
        curvature: mk(curv)?,
        symmetry: mk(sym)?,
        plane: mk(plane)?,
    })
}
