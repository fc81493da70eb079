//! Small dense and banded linear algebra used across the crate.
//!
//! Everything here works on plain slices and fixed-size arrays so the crate
//! stays `no_std`. Matrices passed as slices are row-major unless a type says
//! otherwise.

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, hypot, sqrt};

/// Euclidean 3-vector in chart coordinates.
pub type Vec3 = [f64; 3];

/// Real 4-vector, used for both quaternion coefficients and C⊕C coordinates.
pub type Vec4 = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular at pivot {0}")]
    Singular(usize),
    #[error("least-squares design matrix is rank deficient")]
    RankDeficient,
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale3(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn norm3(a: Vec3) -> f64 {
    sqrt(dot3(a, a))
}

#[inline]
pub fn dot4(a: Vec4, b: Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm4(a: Vec4) -> f64 {
    sqrt(dot4(a, a))
}

#[inline]
pub fn scale4(s: f64, a: Vec4) -> Vec4 {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

#[inline]
pub fn add4(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub4(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Eigenvalues `(min, max)` of the symmetric matrix `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let r = hypot(0.5 * (a - c), b);
    (mean - r, mean + r)
}

/// Unit eigenvector of `[[a, b], [b, c]]` for the eigenvalue `lambda`.
pub fn sym2_eigenvector(a: f64, b: f64, c: f64, lambda: f64) -> [f64; 2] {
    // Use whichever row of (M - λ) is better conditioned.
    let r1 = [b, lambda - a];
    let r2 = [lambda - c, b];
    let v = if hypot(r1[0], r1[1]) >= hypot(r2[0], r2[1]) { r1 } else { r2 };
    let n = hypot(v[0], v[1]);
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Solves `a x = b` in place for a small dense `n × n` row-major matrix.
pub fn solve_dense(n: usize, a: &mut [f64], b: &mut [f64]) -> Result<(), LinalgError> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let mut p = k;
        for r in k + 1..n {
            if fabs(a[r * n + k]) > fabs(a[p * n + k]) {
                p = r;
            }
        }
        if a[p * n + k] == 0.0 {
            return Err(LinalgError::Singular(k));
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            b.swap(k, p);
        }
        let piv = a[k * n + k];
        for r in k + 1..n {
            let l = a[r * n + k] / piv;
            if l != 0.0 {
                for c in k..n {
                    a[r * n + c] -= l * a[k * n + c];
                }
                b[r] -= l * b[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}

/// Determinant of a small dense row-major matrix by partial-pivot elimination.
pub fn det_dense(n: usize, a: &[f64]) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for r in k + 1..n {
            if fabs(m[r * n + k]) > fabs(m[p * n + k]) {
                p = r;
            }
        }
        if m[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let piv = m[k * n + k];
        det *= piv;
        for r in k + 1..n {
            let l = m[r * n + k] / piv;
            for c in k..n {
                m[r * n + c] -= l * m[k * n + c];
            }
        }
    }
    det
}

/// Basis of the null space of a `rows × cols` row-major matrix.
///
/// Uses reduced row echelon form with partial pivoting; entries below
/// `rel_tol * max|a|` are treated as zero.
pub fn null_space(rows: usize, cols: usize, a: &[f64], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut m = a.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(fabs(*v)));
    let eps = rel_tol * if scale > 0.0 { scale } else { 1.0 };
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut p = row;
        for r in row + 1..rows {
            if fabs(m[r * cols + col]) > fabs(m[p * cols + col]) {
                p = r;
            }
        }
        if fabs(m[p * cols + col]) <= eps {
            continue;
        }
        for c in 0..cols {
            m.swap(row * cols + c, p * cols + c);
        }
        let piv = m[row * cols + col];
        for c in 0..cols {
            m[row * cols + c] /= piv;
        }
        for r in 0..rows {
            if r != row {
                let l = m[r * cols + col];
                if l != 0.0 {
                    for c in 0..cols {
                        m[r * cols + c] -= l * m[row * cols + c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; cols];
            v[f] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r * cols + f];
            }
            v
        })
        .collect()
}

/// Least-squares solution of `a x ≈ b` by Householder QR.
///
/// `a` is `rows × cols` row-major with `rows >= cols`. Returns
/// [`LinalgError::RankDeficient`] when a diagonal entry of R falls below
/// `rel_tol` times the largest one.
pub fn least_squares(
    rows: usize,
    cols: usize,
    a: &[f64],
    b: &[f64],
    rel_tol: f64,
) -> Result<Vec<f64>, LinalgError> {
    if rows < cols {
        return Err(LinalgError::RankDeficient);
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; cols];
    for k in 0..cols {
        let mut norm = 0.0;
        for r in k..rows {
            norm += m[r * cols + k] * m[r * cols + k];
        }
        let norm = sqrt(norm);
        if norm == 0.0 {
            return Err(LinalgError::RankDeficient);
        }
        let alpha = if m[k * cols + k] > 0.0 { -norm } else { norm };
        // v = x - alpha e_k, stored in column k below (and at) the diagonal.
        m[k * cols + k] -= alpha;
        let mut vnorm2 = 0.0;
        for r in k..rows {
            vnorm2 += m[r * cols + k] * m[r * cols + k];
        }
        if vnorm2 > 0.0 {
            for c in k + 1..cols {
                let mut s = 0.0;
                for r in k..rows {
                    s += m[r * cols + k] * m[r * cols + c];
                }
                let f = 2.0 * s / vnorm2;
                for r in k..rows {
                    m[r * cols + c] -= f * m[r * cols + k];
                }
            }
            let mut s = 0.0;
            for r in k..rows {
                s += m[r * cols + k] * rhs[r];
            }
            let f = 2.0 * s / vnorm2;
            for r in k..rows {
                rhs[r] -= f * m[r * cols + k];
            }
        }
        diag[k] = alpha;
    }
    let dmax = diag.iter().fold(0.0f64, |acc, v| acc.max(fabs(*v)));
    if diag.iter().any(|d| fabs(*d) <= rel_tol * dmax) {
        return Err(LinalgError::RankDeficient);
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = rhs[k];
        for c in k + 1..cols {
            s -= m[k * cols + c] * x[c];
        }
        x[k] = s / diag[k];
    }
    Ok(x)
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored
/// column-major with room for the fill-in produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ab: vec![0.0; ld * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn ld(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // Row kv + i - j of column j, kv = kl + ku.
        j * self.ld() + (self.kl + self.ku + i - j)
    }

    /// Adds `v` to entry `(i, j)`. Panics if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i <= j + self.kl && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    /// LU factorisation with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(mut self) -> Result<BandLu, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ld = self.ld();
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ld;
            let mut jp = 0;
            let mut best = fabs(self.ab[col + kv]);
            for t in 1..=km {
                let v = fabs(self.ab[col + kv + t]);
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(LinalgError::Singular(j));
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = c * ld + kv + j - c;
                    let b = c * ld + kv + j + jp - c;
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[col + kv];
            for t in 1..=km {
                self.ab[col + kv + t] /= piv;
            }
            for c in j + 1..=ju {
                let u = self.ab[c * ld + kv + j - c];
                if u != 0.0 {
                    for t in 1..=km {
                        let l = self.ab[col + kv + t];
                        self.ab[c * ld + kv + j + t - c] -= l * u;
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Factored band matrix ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let kv = self.m.kl + self.m.ku;
        let ld = self.m.ld();
        let ab = &self.m.ab;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            for t in 1..=km {
                b[j + t] -= ab[j * ld + kv + t] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= ab[j * ld + kv];
            let bj = b[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= ab[j * ld + kv + i - j] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn band_solver_matches_dense_solver() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let (n, kl, ku) = (40, 5, 3);
        let mut band = BandMatrix::new(n, kl, ku);
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                band.add(i, j, v);
                dense[i * n + j] = v;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut x_band = rhs.clone();
        band.factor().unwrap().solve(&mut x_band);
        let mut x_dense = rhs.clone();
        solve_dense(n, &mut dense, &mut x_dense).unwrap();
        for (a, b) in x_band.iter().zip(&x_dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_band_matrix_is_reported() {
        let band = BandMatrix::new(3, 1, 1);
        assert_eq!(band.factor().unwrap_err(), LinalgError::Singular(0));
    }

    #[test]
    fn null_space_of_rank_one_matrix() {
        let a = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0];
        let ns = null_space(2, 3, &a, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((v[0] + 2.0 * v[1] + 3.0 * v[2]).abs() < 1e-14);
        }
    }

    #[test]
    fn least_squares_recovers_exact_fit_and_flags_rank_deficiency() {
        // y = 1 + 2x sampled at 4 points
        let a = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let b = [1.0, 3.0, 5.0, 7.0];
        let x = least_squares(4, 2, &a, &b, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 2.0).abs() < 1e-13);
        let dup = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        assert_eq!(
            least_squares(3, 2, &dup, &[1.0, 2.0, 3.0], 1e-12),
            Err(LinalgError::RankDeficient)
        );
    }

    #[test]
    fn sym2_eigen_pairs() {
        let (lo, hi) = sym2_eigenvalues(2.0, 1.0, 2.0);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        let v = sym2_eigenvector(2.0, 1.0, 2.0, hi);
        assert!((v[0] - v[1]).abs() < 1e-15);
    }
}
