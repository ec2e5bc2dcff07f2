//! Boundary operators `Theta`: symbolic specs, their Galerkin forms, the
//! plane-wave sign condition and admissibility classification.

mod classify;
mod spec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use classify::{classify, h_half_proxy, AdmissibilityVerdict, PartVerdict, DEFAULT_DELTA};
pub use spec::{BoundaryFn, BoundaryOperatorSpec, Coefficient, Kernel, KernelFn, ThetaClass};

use crate::assembly::{assemble_boundary_weighted, assemble_nonlocal, assemble_rank_one, DiscreteForm, FormKind};
use crate::dense;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryTraversal, TriangleMesh};

/// Number of polygon sides seen by the traversal.
fn side_count(traversal: &BoundaryTraversal) -> usize {
    traversal.edges().map(|e| e.side + 1).max().unwrap_or(0)
}

/// Structural checks that need the boundary: per-side coefficient counts,
/// finiteness, and a symmetry spot-check of kernels at 64 seeded pairs.
pub fn validate(spec: &BoundaryOperatorSpec, traversal: &BoundaryTraversal) -> Result<()> {
    for (part, _) in spec.parts() {
        match part {
            BoundaryOperatorSpec::Multiplication { theta: Coefficient::Edges(v), .. }
            | BoundaryOperatorSpec::RankOne { g: Coefficient::Edges(v), .. } => {
                let sides = side_count(traversal);
                if v.len() != sides {
                    return Err(Error::BoundaryOperator(format!("{} edge values for a polygon with {sides} sides", v.len())));
                }
            }
            BoundaryOperatorSpec::Kernel(k) => check_kernel_symmetry(k, traversal.perimeter)?,
            BoundaryOperatorSpec::Abstract(name) => {
                return Err(Error::UnverifiablePairing(format!("'{name}' has no L2(boundary) factorization")));
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_kernel_symmetry(k: &Kernel, perimeter: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let s = rng.random::<f64>() * perimeter;
        let t = rng.random::<f64>() * perimeter;
        let (a, b) = (k.eval(s, t, perimeter), k.eval(t, s, perimeter));
        if !(a.is_finite() && b.is_finite()) || (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::NotSelfAdjoint(format!("k({s}, {t}) = {a} but k({t}, {s}) = {b}")));
        }
    }
    Ok(())
}

/// Galerkin matrix of `<u, Theta v>` on the boundary traces of P1 functions.
pub fn theta_matrix(mesh: &TriangleMesh, traversal: &BoundaryTraversal, spec: &BoundaryOperatorSpec) -> Result<DiscreteForm> {
    validate(spec, traversal)?;
    leaf_or_sum(mesh, traversal, spec)
}

fn leaf_or_sum(mesh: &TriangleMesh, traversal: &BoundaryTraversal, spec: &BoundaryOperatorSpec) -> Result<DiscreteForm> {
    let perimeter = traversal.perimeter;
    match spec {
        BoundaryOperatorSpec::Zero => Ok(DiscreteForm::zero(mesh.n_nodes())),
        BoundaryOperatorSpec::Multiplication { theta, .. } => assemble_boundary_weighted(mesh, traversal, &|p| theta.eval(p)),
        BoundaryOperatorSpec::Kernel(k) => assemble_nonlocal(mesh, traversal, &|s, t| k.eval(s, t, perimeter)),
        BoundaryOperatorSpec::RankOne { g, c } => assemble_rank_one(mesh, traversal, &|p| g.eval(p), *c),
        BoundaryOperatorSpec::Composite(parts) => {
            let mut acc = DiscreteForm::zero(mesh.n_nodes());
            for (p, _) in parts {
                acc = acc.plus(&leaf_or_sum(mesh, traversal, p)?)?;
            }
            acc.kind = FormKind::Composite;
            Ok(acc)
        }
        BoundaryOperatorSpec::Abstract(name) => Err(Error::UnverifiablePairing(name.clone())),
    }
}

/// `<e, Theta e>` for the plane wave `e(x) = exp(i x . eta)`, sampled exactly
/// at the boundary quadrature points. The imaginary part must vanish to
/// `1e-10` relative, as it does for any self-adjoint `Theta`.
pub fn plane_wave_form(traversal: &BoundaryTraversal, spec: &BoundaryOperatorSpec, eta: [f64; 2]) -> Result<f64> {
    validate(spec, traversal)?;
    let pts: Vec<_> = traversal.quad_points().map(|(bp, q, _)| (bp, q.weight)).collect();
    let waves: Vec<Complex64> = pts.iter().map(|(bp, _)| Complex64::from_polar(1.0, bp.x[0] * eta[0] + bp.x[1] * eta[1])).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (part, _) in spec.parts() {
        let v = match part {
            BoundaryOperatorSpec::Zero => Complex64::new(0.0, 0.0),
            BoundaryOperatorSpec::Multiplication { theta, .. } => {
                pts.iter().zip(&waves).map(|((bp, w), e)| e.conj() * e * (w * theta.eval(bp))).sum()
            }
            BoundaryOperatorSpec::Kernel(k) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, (pa, wa)) in pts.iter().enumerate() {
                    let mut row = Complex64::new(0.0, 0.0);
                    for (b, (pb, wb)) in pts.iter().enumerate() {
                        let kv = 0.5 * (k.eval(pa.s, pb.s, traversal.perimeter) + k.eval(pb.s, pa.s, traversal.perimeter));
                        row += waves[b] * (wb * kv);
                    }
                    acc += waves[a].conj() * row * *wa;
                }
                acc
            }
            BoundaryOperatorSpec::RankOne { g, c } => {
                let inner: Complex64 = pts.iter().zip(&waves).map(|((bp, w), e)| e * (w * g.eval(bp))).sum();
                Complex64::new(c * inner.norm_sqr(), 0.0)
            }
            BoundaryOperatorSpec::Composite(_) | BoundaryOperatorSpec::Abstract(_) => unreachable!("validated and flattened"),
        };
        magnitude += v.norm();
        total += v;
    }
    if total.im.abs() > 1e-10 * total.re.abs().max(magnitude).max(f64::MIN_POSITIVE) {
        return Err(Error::NotSelfAdjoint(format!("plane-wave form has imaginary part {} (real part {})", total.im, total.re)));
    }
    Ok(total.re)
}

/// `int theta` over the boundary, exact for piecewise constant `theta`.
pub fn boundary_integral(theta: &Coefficient, traversal: &BoundaryTraversal) -> f64 {
    traversal.quad_points().map(|(bp, q, _)| q.weight * theta.eval(&bp)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonpositivityVerdict {
    pub pass: bool,
    /// Largest eigenvalue of the boundary block; a positive value is the
    /// witness of failure.
    pub max_eigenvalue: f64,
    pub scale: f64,
    pub tol: f64,
}

/// Whether the form is negative semidefinite on the boundary nodes
/// (`lambda_max <= tol * max|B|`).
pub fn check_nonpositive(form: &DiscreteForm, mesh: &TriangleMesh, tol: f64) -> NonpositivityVerdict {
    let bnodes = mesh.boundary_nodes();
    let block = boundary_block(form, &bnodes);
    let scale = block.amax();
    if scale == 0.0 {
        return NonpositivityVerdict { pass: true, max_eigenvalue: 0.0, scale: 0.0, tol };
    }
    let max_eigenvalue = *dense::symmetric_eigenvalues(&block).last().expect("nonempty boundary");
    NonpositivityVerdict { pass: max_eigenvalue <= tol * scale, max_eigenvalue, scale, tol }
}

pub(crate) fn boundary_block(form: &DiscreteForm, bnodes: &[usize]) -> DMatrix<f64> {
    let sub = form.matrix.principal_submatrix(bnodes);
    sub.to_dense()
}

/// Quadrature approximation of `||theta||_{L^p(boundary)}`; `p = inf`
/// gives the maximum over the quadrature samples.
pub fn lp_norm(theta: &Coefficient, p: f64, traversal: &BoundaryTraversal) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("L^p exponent must exceed 1, got {p}")));
    }
    let samples = traversal.quad_points().map(|(bp, q, _)| (q.weight, theta.eval(&bp).abs()));
    if p.is_infinite() {
        return Ok(samples.map(|s| s.1).fold(0.0, f64::max));
    }
    Ok(samples.map(|(w, v)| w * v.powf(p)).sum::<f64>().powf(1.0 / p))
}
