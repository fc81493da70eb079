//! The upper half-space model of H³: metric, connection, hyperboloid
//! embedding, isometries and geodesics.

use libm::{cos, cosh, exp, fabs, sin, sinh, sqrt, tanh};
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::linalg::{add3, cross3, dot3, norm3, scale3, sub3, Vec3, Vec4};
use crate::tol;

/// Point `(x, y, z)` with `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        if z > 0.0 && z.is_finite() && x.is_finite() && y.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(GeometryError::OutsideModel)
        }
    }

    pub fn from_vec(p: Vec3) -> Result<Self, GeometryError> {
        Self::new(p[0], p[1], p[2])
    }

    pub fn to_vec(self) -> Vec3 {
        [self.x, self.y, self.z]
    }
}

/// `g_p(u, v) = (u · v) / z²`.
#[inline]
pub fn metric(p: Vec3, u: Vec3, v: Vec3) -> f64 {
    dot3(u, v) / (p[2] * p[2])
}

#[inline]
pub fn g_norm(p: Vec3, u: Vec3) -> f64 {
    norm3(u) / p[2]
}

/// `Γ_p(u, v)`, so that `∇_u W = dW(u) + Γ(u, W)`.
pub fn christoffel(p: Vec3, u: Vec3, v: Vec3) -> Vec3 {
    let f = -1.0 / p[2];
    let uv = dot3(u, v);
    [
        f * (u[0] * v[2] + v[0] * u[2]),
        f * (u[1] * v[2] + v[1] * u[2]),
        f * (u[2] * v[2] + v[2] * u[2] - uv),
    ]
}

/// Wedge product on `T_p H³`: `g(u ∧ v, w)` is the oriented volume.
pub fn wedge(p: Vec3, u: Vec3, v: Vec3) -> Vec3 {
    scale3(1.0 / p[2], cross3(u, v))
}

/// `cosh d(p, q) − 1`, free of cancellation.
#[inline]
fn cosh_gap(p: Vec3, q: Vec3) -> f64 {
    let d = sub3(p, q);
    dot3(d, d) / (2.0 * p[2] * q[2])
}

/// `acosh(1 + δ)` for `δ ≥ 0`.
#[inline]
fn acosh1p(delta: f64) -> f64 {
    libm::log1p(delta + sqrt(delta * (delta + 2.0)))
}

/// Hyperbolic distance.
pub fn distance(p: Vec3, q: Vec3) -> f64 {
    acosh1p(cosh_gap(p, q))
}

/// Minkowski product `−X0 Y0 + X1 Y1 + X2 Y2 + X3 Y3`.
#[inline]
pub fn minkowski(a: Vec4, b: Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Embedding of the half-space model onto the upper hyperboloid sheet.
pub fn to_hyperboloid(p: Vec3) -> Vec4 {
    let (x, y, z) = (p[0], p[1], p[2]);
    let a = x * x + y * y + z * z;
    [(a + 1.0) / (2.0 * z), x / z, y / z, (a - 1.0) / (2.0 * z)]
}

pub fn from_hyperboloid(xx: Vec4) -> Vec3 {
    let z = 1.0 / (xx[0] - xx[3]);
    [xx[1] * z, xx[2] * z, z]
}

/// Differential of [`to_hyperboloid`] at `p` applied to `v`.
pub fn push_to_hyperboloid(p: Vec3, v: Vec3) -> Vec4 {
    let (x, y, z) = (p[0], p[1], p[2]);
    let a = x * x + y * y + z * z;
    let cx = [x / z, 1.0 / z, 0.0, x / z];
    let cy = [y / z, 0.0, 1.0 / z, y / z];
    let cz = [
        1.0 - (a + 1.0) / (2.0 * z * z),
        -x / (z * z),
        -y / (z * z),
        1.0 - (a - 1.0) / (2.0 * z * z),
    ];
    core::array::from_fn(|k| cx[k] * v[0] + cy[k] * v[1] + cz[k] * v[2])
}

/// Inverse of [`push_to_hyperboloid`] on tangent vectors at `Ψ(p)`.
pub fn pull_from_hyperboloid(p: Vec3, w: Vec4) -> Vec3 {
    // v = g⁻¹ Jᵗ η w with g⁻¹ = z² Id.
    let z2 = p[2] * p[2];
    let e = |c: Vec3| minkowski(push_to_hyperboloid(p, c), w) * z2;
    [e([1.0, 0.0, 0.0]), e([0.0, 1.0, 0.0]), e([0.0, 0.0, 1.0])]
}

/// Riemannian logarithm `log_p q`, in half-space coordinates at `p`.
pub fn log_map(p: Vec3, q: Vec3) -> Vec3 {
    if p == q {
        return [0.0; 3];
    }
    let delta = cosh_gap(p, q);
    let d = acosh1p(delta);
    let xp = to_hyperboloid(p);
    let xq = to_hyperboloid(q);
    let f = if d > 0.0 { d / sinh(d) } else { 1.0 };
    let w: Vec4 = core::array::from_fn(|k| f * ((xq[k] - xp[k]) - delta * xp[k]));
    pull_from_hyperboloid(p, w)
}

/// Riemannian exponential `exp_p v`.
pub fn exp_map(p: Vec3, v: Vec3) -> Vec3 {
    let n = g_norm(p, v);
    if n == 0.0 {
        return p;
    }
    let xp = to_hyperboloid(p);
    let w = push_to_hyperboloid(p, v);
    let (c, s) = (cosh(n), sinh(n) / n);
    from_hyperboloid(core::array::from_fn(|k| c * xp[k] + s * w[k]))
}

/// Parallel transport of `v ∈ T_p` to `T_q` along the geodesic segment.
pub fn parallel_transport(p: Vec3, q: Vec3, v: Vec3) -> Vec3 {
    if p == q {
        return v;
    }
    let xp = to_hyperboloid(p);
    let xq = to_hyperboloid(q);
    let w = push_to_hyperboloid(p, v);
    let f = minkowski(xq, w) / (1.0 - minkowski(xp, xq));
    let moved: Vec4 = core::array::from_fn(|k| w[k] + f * (xp[k] + xq[k]));
    pull_from_hyperboloid(q, moved)
}

/// Orientation-preserving isometries used to move catalog surfaces off
/// their coordinate-aligned positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Isometry {
    Identity,
    /// Inversion in the sphere of radius `radius` about the boundary point
    /// `(center, 0)`, followed by the reflection `x ↦ 2 center_x − x`.
    Flip { center: [f64; 2], radius: f64 },
    /// `p ↦ λ p + (a, b, 0)`.
    Similarity { scale: f64, shift: [f64; 2] },
}

impl Isometry {
    pub fn apply(&self, p: Vec3) -> Vec3 {
        match *self {
            Isometry::Identity => p,
            Isometry::Flip { center, radius } => {
                let w = [p[0] - center[0], p[1] - center[1], p[2]];
                let f = radius * radius / dot3(w, w);
                [center[0] - f * w[0], center[1] + f * w[1], f * w[2]]
            }
            Isometry::Similarity { scale, shift } => {
                [scale * p[0] + shift[0], scale * p[1] + shift[1], scale * p[2]]
            }
        }
    }

    /// Differential at `p` applied to `v`.
    pub fn push(&self, p: Vec3, v: Vec3) -> Vec3 {
        match *self {
            Isometry::Identity => v,
            Isometry::Flip { center, radius } => {
                let w = [p[0] - center[0], p[1] - center[1], p[2]];
                let w2 = dot3(w, w);
                let f = radius * radius / w2;
                let wv = dot3(w, v);
                let img = sub3(v, scale3(2.0 * wv / w2, w));
                let img = scale3(f, img);
                [-img[0], img[1], img[2]]
            }
            Isometry::Similarity { scale, .. } => scale3(scale, v),
        }
    }
}

/// Complete geodesic with unit-speed parametrisation `s ↦ γ(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeodesicH3 {
    /// `γ(s) = (x0, y0, e^s)`.
    Vertical { x0: f64, y0: f64 },
    /// `γ(s) = (c + R tanh(s) u, R sech(s))` with `u` a unit vector.
    HalfCircle { center: [f64; 2], radius: f64, direction: [f64; 2] },
}

/// Point, velocity and a parallel orthonormal normal frame `(n1, n2)` with
/// `(τ, n1, n2)` positively oriented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicFrame {
    pub point: Vec3,
    pub tangent: Vec3,
    pub n1: Vec3,
    pub n2: Vec3,
}

impl GeodesicH3 {
    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            GeodesicH3::Vertical { x0, y0 } if x0.is_finite() && y0.is_finite() => Ok(()),
            GeodesicH3::HalfCircle { radius, direction, .. } => {
                let n = libm::hypot(direction[0], direction[1]);
                if radius > 0.0 && fabs(n - 1.0) <= tol::STRUCTURE {
                    Ok(())
                } else {
                    Err(GeometryError::BadParameter("half-circle geodesic"))
                }
            }
            _ => Err(GeometryError::BadParameter("vertical geodesic")),
        }
    }

    pub fn point(&self, s: f64) -> Vec3 {
        match *self {
            GeodesicH3::Vertical { x0, y0 } => [x0, y0, exp(s)],
            GeodesicH3::HalfCircle { center, radius, direction } => {
                let th = tanh(s);
                [
                    center[0] + radius * th * direction[0],
                    center[1] + radius * th * direction[1],
                    radius / cosh(s),
                ]
            }
        }
    }

    pub fn frame(&self, s: f64) -> GeodesicFrame {
        let p = self.point(s);
        let z = p[2];
        match *self {
            GeodesicH3::Vertical { .. } => GeodesicFrame {
                point: p,
                tangent: [0.0, 0.0, z],
                n1: [z, 0.0, 0.0],
                n2: [0.0, z, 0.0],
            },
            GeodesicH3::HalfCircle { radius, direction: u, .. } => {
                let sech = 1.0 / cosh(s);
                let tangent = [
                    radius * sech * sech * u[0],
                    radius * sech * sech * u[1],
                    -radius * sech * tanh(s),
                ];
                let n1 = [-z * u[1], z * u[0], 0.0];
                let n2 = wedge(p, tangent, n1);
                GeodesicFrame {
                    point: p,
                    tangent,
                    n1,
                    n2,
                }
            }
        }
    }

    /// Hyperbolic distance from `q` to the geodesic.
    pub fn distance_to(&self, q: Vec3) -> f64 {
        match *self {
            GeodesicH3::Vertical { x0, y0 } => {
                let r = libm::hypot(q[0] - x0, q[1] - y0);
                libm::asinh(r / q[2])
            }
            GeodesicH3::HalfCircle { .. } => {
                // Minimise over the parameter by golden-section search.
                let f = |s: f64| distance(q, self.point(s));
                let (mut a, mut b) = (-40.0f64, 40.0f64);
                let gr = 0.5 * (sqrt(5.0) - 1.0);
                for _ in 0..200 {
                    let c = b - gr * (b - a);
                    let d = a + gr * (b - a);
                    if f(c) < f(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                f(0.5 * (a + b))
            }
        }
    }
}

/// `cos θ n1 + sin θ n2`.
pub fn frame_direction(f: &GeodesicFrame, theta: f64) -> Vec3 {
    add3(scale3(cos(theta), f.n1), scale3(sin(theta), f.n2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_point(rng: &mut impl Rng) -> Vec3 {
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0)]
    }

    #[test]
    fn hyperboloid_round_trip_and_isometry() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(60);
        for _ in 0..500 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let xp = to_hyperboloid(p);
            assert!((minkowski(xp, xp) + 1.0).abs() < 1e-12);
            let back = from_hyperboloid(xp);
            assert!(norm3(sub3(back, p)) < 1e-12);
            let v: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let w = push_to_hyperboloid(p, v);
            assert!((minkowski(w, w) - metric(p, v, v)).abs() < 1e-12);
            assert!(norm3(sub3(pull_from_hyperboloid(p, w), v)) < 1e-12);
            let d = distance(p, q);
            assert!((libm::acosh(-minkowski(xp, to_hyperboloid(q))) - d).abs() < 1e-9);
        }
    }

    #[test]
    fn exp_and_log_are_inverse() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(61);
        for _ in 0..500 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let v = log_map(p, q);
            assert!((g_norm(p, v) - distance(p, q)).abs() < 1e-9);
            assert!(norm3(sub3(exp_map(p, v), q)) < 1e-9);
        }
    }

    #[test]
    fn transport_is_isometric_and_moves_geodesic_velocity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(62);
        for _ in 0..500 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let v: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let u: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let (tv, tu) = (parallel_transport(p, q, v), parallel_transport(p, q, u));
            assert!((metric(q, tv, tu) - metric(p, v, u)).abs() < 1e-9);
            // velocity of the segment is carried to minus the log at the end
            let lp = log_map(p, q);
            let lq = log_map(q, p);
            assert!(g_norm(q, add3(parallel_transport(p, q, lp), lq)) < 1e-8);
        }
    }

    #[test]
    fn christoffel_matches_closed_form_symbols() {
        let p = [0.2, -0.4, 1.7];
        let z = p[2];
        let ex = [1.0, 0.0, 0.0];
        let ez = [0.0, 0.0, 1.0];
        assert!((christoffel(p, ex, ez)[0] + 1.0 / z).abs() < 1e-15);
        assert!((christoffel(p, ex, ex)[2] - 1.0 / z).abs() < 1e-15);
        assert!((christoffel(p, ez, ez)[2] + 1.0 / z).abs() < 1e-15);
    }

    #[test]
    fn flip_is_orientation_preserving_isometry() {
        let iso = Isometry::Flip { center: [0.3, -0.2], radius: 1.3 };
        let mut rng = rand::rngs::StdRng::seed_from_u64(63);
        for _ in 0..200 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            assert!((distance(iso.apply(p), iso.apply(q)) - distance(p, q)).abs() < 1e-9);
            let u: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let w: Vec3 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let ip = iso.apply(p);
            let (pu, pv, pw) = (iso.push(p, u), iso.push(p, v), iso.push(p, w));
            assert!((metric(ip, pu, pv) - metric(p, u, v)).abs() < 1e-9);
            let vol = |a: Vec3, b: Vec3, c: Vec3| dot3(cross3(a, b), c);
            assert!(vol(pu, pv, pw) * vol(u, v, w) >= 0.0);
            // differential agrees with central differences
            let h = 1e-6;
            let fd = scale3(0.5 / h, sub3(iso.apply(add3(p, scale3(h, u))), iso.apply(sub3(p, scale3(h, u)))));
            assert!(norm3(sub3(fd, pu)) < 1e-6);
        }
    }

    #[test]
    fn geodesics_have_unit_speed_and_parallel_frames() {
        let geos = [
            GeodesicH3::Vertical { x0: 0.3, y0: -1.0 },
            GeodesicH3::HalfCircle { center: [0.1, 0.2], radius: 1.5, direction: [0.6, 0.8] },
        ];
        for g in geos {
            g.validate().unwrap();
            for k in -10..=10 {
                let s = 0.2 * k as f64;
                let f = g.frame(s);
                assert!((g_norm(f.point, f.tangent) - 1.0).abs() < 1e-10);
                assert!((g_norm(f.point, f.n1) - 1.0).abs() < 1e-12);
                assert!((g_norm(f.point, f.n2) - 1.0).abs() < 1e-12);
                assert!(metric(f.point, f.tangent, f.n1).abs() < 1e-12);
                assert!(metric(f.point, f.n1, f.n2).abs() < 1e-12);
                // d/ds of position matches the tangent
                let h = 1e-5;
                let fd = scale3(0.5 / h, sub3(g.point(s + h), g.point(s - h)));
                assert!(norm3(sub3(fd, f.tangent)) < 1e-8);
                // covariant derivative of n1 along the geodesic vanishes
                let dn = scale3(0.5 / h, sub3(g.frame(s + h).n1, g.frame(s - h).n1));
                let cov = add3(dn, christoffel(f.point, f.tangent, f.n1));
                assert!(norm3(cov) < 1e-8, "{cov:?}");
                assert!(g.distance_to(f.point) < 1e-6);
            }
        }
    }
}
