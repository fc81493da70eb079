//! Tolerance ladder shared by every module.
//!
//! All predicates assume inputs of order one. Callers working with large or
//! tiny magnitudes must normalize before asking structural questions.

/// Exact-structure predicates: unit norm, imaginarity, matrix equality,
/// lagrangian and complex-line tests.
pub const STRUCTURE: f64 = 1e-10;

/// Algebraic identities that hold exactly over the reals, checked on O(1) data.
pub const IDENTITY: f64 = 1e-12;

/// Relative width of the null band used when classifying Hessian eigenvalues.
pub const NULL_BAND: f64 = 1e-8;

/// Eigenvalue floor applied to Hessian iterates in the Newton solver.
pub const CONVEXITY_FLOOR: f64 = 1e-8;

/// Minimum singular value of the parameter derivative for a valid immersion.
pub const IMMERSION: f64 = 1e-8;

/// Normal-orthogonality tolerance on computed surface normals.
pub const NORMAL: f64 = 1e-8;
