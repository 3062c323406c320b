//! Weighted section measures of origin-symmetric star bodies.
//!
//! The crate computes body and hyperplane-section measures for general
//! densities, tests positive definiteness of degree -1 homogeneous kernels
//! through spherical-harmonic multipliers, and builds convex bodies that
//! violate the Busemann-Petty implication when the kernel is not positive
//! definite.

pub mod bodies;
pub mod bpgm;
pub mod error;
pub mod harmonics;
pub mod measures;
pub mod quadrature;
pub mod sphere;

pub use error::{Error, Result, Warning};
pub use sphere::{Direction, GridSpec, Rule, SphereGrid, SubspaceFrame};
