//! Polygonal domains, conforming P1 meshes, red refinement and boundary traversal.

mod domain;
pub mod m2d;
mod mesh;
mod traversal;

pub use domain::{polygon_signed_area, DomainShape, Point, PolygonalDomain};
pub use mesh::{ear_clip, BoundaryEdge, TriangleMesh};
pub use traversal::{BoundaryLoop, BoundaryPoint, BoundaryTraversal, QuadPoint, TraversalEdge, GAUSS2};

/// Mesh of `domain` after `level` uniform refinements.
pub fn mesh_at_level(domain: &PolygonalDomain, level: usize) -> crate::Result<TriangleMesh> {
    Ok(TriangleMesh::coarse(domain)?.refined(level))
}
