use crate::assembly::{assemble_boundary_mass, assemble_mass, assemble_stiffness};
use crate::boundary_ops::{theta_matrix, BoundaryOperatorSpec};
use crate::eigen::{solve, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryTraversal, TriangleMesh};

/// Coercivity constant against the `H^1` norm.
pub const COERCIVITY_C0: f64 = 0.5;

/// Smallest `beta >= 0` with `||u||^2_{L2(boundary)} <= eps ||grad u||^2 + beta ||u||^2`
/// on the P1 space: the largest eigenvalue of `(T - eps A, M)`, clamped at 0.
pub fn trace_beta(mesh: &TriangleMesh, eps: f64, opts: &SolveOptions) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let traversal = BoundaryTraversal::new(mesh)?;
    let t = assemble_boundary_mass(mesh, &traversal)?;
    let a = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh)?;
    let k = a.matrix.axpby(eps, &t.matrix, -1.0)?;
    let opts = SolveOptions { want_vectors: false, ..*opts };
    let s = solve(&k, &m.matrix, 1, &opts)?;
    Ok((-s.eigenvalues[0]).max(0.0))
}

/// Smallest `kappa` with `a_Theta(u) + kappa ||u||^2 >= C0 ||u||^2_{H^1}`
/// on the P1 space, `C0 = 1/2`: the largest eigenvalue of
/// `(C0 (A + M) - A - B, M)`, i.e. `C0 - lambda_min((1 - C0) A + B, M)`.
pub fn coercivity_kappa(mesh: &TriangleMesh, spec: &BoundaryOperatorSpec, opts: &SolveOptions) -> Result<f64> {
    let traversal = BoundaryTraversal::new(mesh)?;
    let a = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh)?;
    let b = theta_matrix(mesh, &traversal, spec)?;
    let k = a.matrix.axpby(1.0 - COERCIVITY_C0, &b.matrix, 1.0)?;
    let opts = SolveOptions { want_vectors: false, ..*opts };
    let s = solve(&k, &m.matrix, 1, &opts)?;
    Ok(COERCIVITY_C0 - s.eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_at_level, PolygonalDomain};

    #[test]
    fn kappa_of_zero_is_c0() {
        let mesh = mesh_at_level(&PolygonalDomain::unit_square(), 3).unwrap();
        let k = coercivity_kappa(&mesh, &BoundaryOperatorSpec::Zero, &SolveOptions::default()).unwrap();
        assert!((k - 0.5).abs() < 1e-10, "{k}");
    }

    #[test]
    fn beta_decreases_with_eps() {
        let mesh = mesh_at_level(&PolygonalDomain::unit_square(), 3).unwrap();
        let opts = SolveOptions::default();
        let b1 = trace_beta(&mesh, 0.1, &opts).unwrap();
        let b2 = trace_beta(&mesh, 0.2, &opts).unwrap();
        assert!(b1 >= b2 && b2 > 0.0);
        assert!(trace_beta(&mesh, 0.0, &opts).is_err());
    }
}
