//! Finite-element eigenvalue laboratory for Laplacians with Dirichlet,
//! Neumann, local Robin and nonlocal Robin boundary conditions on polygons.
//!
//! The pipeline is: [`geometry`] builds nested P1 meshes, [`assembly`] and
//! [`boundary_ops`] produce Galerkin matrices, [`eigen`] solves and counts,
//! [`oracles`] supplies closed-form reference spectra and [`harness`] turns
//! all of it into inequality verdicts with error bars.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod boundary_ops;
pub mod dense;
pub mod eigen;
mod error;
pub mod geometry;
pub mod harness;
pub mod ldlt;
pub mod oracles;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{BoundaryTraversal, PolygonalDomain, TriangleMesh};
