//! Finite metric spaces with a weight `f ≥ 1` and the quasi-maximum walk.

use alloc::vec::Vec;
use libm::{fabs, sqrt};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Absolute slack allowed in the triangle inequality and symmetry checks.
pub const METRIC_SLACK: f64 = 1e-10;

/// Number of random triples checked when the space is too large for an
/// exhaustive check.
pub const TRIANGLE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("distance matrix has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("the space has no points")]
    Empty,
    #[error("d({i}, {j}) is negative or not finite")]
    BadDistance { i: usize, j: usize },
    #[error("d({i}, {i}) is not zero")]
    NonzeroDiagonal { i: usize },
    #[error("d({i}, {j}) differs from d({j}, {i})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails for ({i}, {j}, {k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("f({i}) is below 1 or not finite")]
    WeightBelowOne { i: usize },
    #[error("point index {0} is out of range")]
    OutOfRange(usize),
}

/// `n` points with a dense distance matrix (row-major) and weights `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMetricSpace {
    pub dist: Vec<f64>,
    pub f: Vec<f64>,
}

impl DiscreteMetricSpace {
    pub fn new(dist: Vec<f64>, f: Vec<f64>) -> Result<Self, MetricError> {
        let space = Self { dist, f };
        space.validate()?;
        Ok(space)
    }

    /// Euclidean distances between points of the plane.
    pub fn from_planar_points(points: &[[f64; 2]], f: Vec<f64>) -> Result<Self, MetricError> {
        let n = points.len();
        let mut dist = Vec::with_capacity(n * n);
        for a in points {
            for b in points {
                dist.push(libm::hypot(a[0] - b[0], a[1] - b[1]));
            }
        }
        Self::new(dist, f)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let n = self.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if self.dist.len() != n * n {
            return Err(MetricError::ShapeMismatch { expected: n * n, got: self.dist.len() });
        }
        for (i, &v) in self.f.iter().enumerate() {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(MetricError::WeightBelowOne { i });
            }
        }
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i });
            }
            for j in 0..n {
                let v = self.d(i, j);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(MetricError::BadDistance { i, j });
                }
                if fabs(v - self.d(j, i)) > METRIC_SLACK {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        let check = |i: usize, j: usize, k: usize| {
            if self.d(i, k) > self.d(i, j) + self.d(j, k) + METRIC_SLACK {
                Err(MetricError::Triangle { i, j, k })
            } else {
                Ok(())
            }
        };
        if n * n * n <= TRIANGLE_SAMPLES {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            let mut rng = SmallRng::seed_from_u64(n as u64);
            for _ in 0..TRIANGLE_SAMPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }
}

/// Starting from `x`, repeatedly jump to the first point `z` (in index
/// order) with `d(z, y) ≤ 1/√f(y)` and `f(z) > 2 f(y)`.
pub fn quasi_maximum(space: &DiscreteMetricSpace, x: usize) -> Result<usize, MetricError> {
    if x >= space.len() {
        return Err(MetricError::OutOfRange(x));
    }
    let mut y = x;
    // every jump at least doubles f, so the walk visits each point once
    for _ in 0..space.len() {
        let r = 1.0 / sqrt(space.f[y]);
        let fy = space.f[y];
        match (0..space.len()).find(|&z| space.d(z, y) <= r && space.f[z] > 2.0 * fy) {
            Some(z) => y = z,
            None => break,
        }
    }
    Ok(y)
}

/// Exhaustive check of `f(y) ≥ f(x)` and `f(z) ≤ 2 f(y)` on the ball of
/// radius `1/√f(y)` about `y`.
pub fn quasi_maximum_holds(space: &DiscreteMetricSpace, x: usize, y: usize) -> bool {
    let fy = space.f[y];
    let r = 1.0 / sqrt(fy);
    fy >= space.f[x] && (0..space.len()).all(|z| space.d(z, y) > r || space.f[z] <= 2.0 * fy)
}
