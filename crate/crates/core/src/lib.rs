//! Numerical toolkit for the quaternionic picture of the two-dimensional real
//! Monge–Ampère equation and of flat (K = 1) surfaces in hyperbolic 3-space.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line front end live in the companion `maq` crate.
//!
//! Module map:
//!
//! * [`quaternion`]: quaternion algebra, the Spin(4) double cover and
//!   classification of compatible complex structures and automorphisms.
//! * [`ma_linear`]: the explicit C⊕C model with its structures I, J, K, the
//!   form `m`, lagrangian and complex-line classification of planes, and the
//!   space-time map Φ with its invariant τ.
//! * [`ma_pde`]: finite-difference laboratory for `det Hess u = 1`, the
//!   non-quadratic half-plane solution family and a Dirichlet Newton solver.
//! * [`hyp3`]: surfaces in the upper half-space model of H³, Gauss lifts,
//!   the Sasaki Monge–Ampère structure and tubes around geodesics.
//! * [`degeneration`]: quasi-maximum selection, blow-up rescaling and
//!   normal-graph distances between lifted surfaces.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod convergence;
pub mod degeneration;
pub mod hyp3;
pub mod linalg;
pub mod ma_linear;
pub mod ma_pde;
pub mod quaternion;
pub mod tol;

pub use ma_linear::{Mat2, Plane4, StructurePack};
pub use ma_pde::{Grid2D, ScalarField2D};
pub use quaternion::{LinOp4, Quaternion};
