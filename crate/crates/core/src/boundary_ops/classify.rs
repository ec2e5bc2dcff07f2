use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spec::{BoundaryOperatorSpec, Coefficient, ThetaClass};
use super::{boundary_block, leaf_or_sum, lp_norm, validate};
use crate::assembly::assemble_boundary_mass;
use crate::dense;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryTraversal, TriangleMesh};

/// Default smallness threshold for parts tagged `Theta3`.
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartVerdict {
    pub part: String,
    pub class: ThetaClass,
    /// Declared integrability exponent of a multiplication symbol; `None`
    /// for bounded symbols and for other operators.
    pub lp_exponent: Option<f64>,
    pub lp_norm: Option<f64>,
    /// Largest `|eigenvalue|` of the part against the discrete `H^{1/2}` proxy.
    pub theta3_norm_proxy: Option<f64>,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub pass: bool,
    pub parts: Vec<PartVerdict>,
    pub delta: f64,
    /// The `delta` comparison uses a proxy norm and an uncalibrated
    /// threshold, so it is a heuristic.
    pub heuristic: bool,
    pub notes: Vec<String>,
}

/// Dense `H = T + (T L T)^{1/2}` on the boundary nodes, with `T` the
/// boundary mass and `L` the arclength P1 stiffness along the boundary.
/// Returns the boundary node list alongside.
pub fn h_half_proxy(mesh: &TriangleMesh, traversal: &BoundaryTraversal) -> Result<(Vec<usize>, DMatrix<f64>)> {
    let bnodes = mesh.boundary_nodes();
    let mut local = vec![usize::MAX; mesh.n_nodes()];
    for (k, &i) in bnodes.iter().enumerate() {
        local[i] = k;
    }
    let nb = bnodes.len();
    let t = boundary_block(&assemble_boundary_mass(mesh, traversal)?, &bnodes);
    let mut l = DMatrix::zeros(nb, nb);
    for e in traversal.edges() {
        let [a, b] = e.nodes.map(|i| local[i]);
        let w = 1.0 / e.length;
        l[(a, a)] += w;
        l[(b, b)] += w;
        l[(a, b)] -= w;
        l[(b, a)] -= w;
    }
    let tlt = &t * l * &t;
    let h = &t + dense::psd_sqrt(&tlt);
    Ok((bnodes, h))
}

/// Sorts the parts of `spec` into the admissible decomposition and checks
/// the bounds that can be checked: multiplication symbols must have a finite
/// `L^p` norm, kernels and rank-one terms factor through `L^2` of the
/// boundary, and parts tagged `Theta3` must have proxy norm at most `delta`.
pub fn classify(spec: &BoundaryOperatorSpec, mesh: &TriangleMesh, traversal: &BoundaryTraversal, delta: f64) -> AdmissibilityVerdict {
    let mut notes = Vec::new();
    let mut parts = Vec::new();
    if let Err(e) = validate(spec, traversal) {
        notes.push(format!("spec rejected: {e}"));
        return AdmissibilityVerdict { pass: false, parts, delta, heuristic: true, notes };
    }
    let mut proxy: Option<Result<(Vec<usize>, DMatrix<f64>)>> = None;
    for (part, class) in spec.parts() {
        let mut v = PartVerdict {
            part: part.to_string(),
            class,
            lp_exponent: None,
            lp_norm: None,
            theta3_norm_proxy: None,
            pass: true,
            note: String::new(),
        };
        match part {
            BoundaryOperatorSpec::Zero => v.note = "zero operator".into(),
            BoundaryOperatorSpec::Multiplication { theta, p } => {
                v.lp_exponent = p.is_finite().then_some(*p);
                match lp_norm(theta, *p, traversal) {
                    Ok(n) if n.is_finite() => {
                        v.lp_norm = Some(n);
                        v.note = "multiplication by an L^p symbol: compact perturbation of the trace form".into();
                    }
                    Ok(n) => {
                        v.lp_norm = Some(n);
                        v.pass = false;
                        v.note = "symbol norm is not finite".into();
                    }
                    Err(e) => {
                        v.pass = false;
                        v.note = e.to_string();
                    }
                }
                if let Coefficient::Custom(_) = theta {
                    v.note.push_str("; norm estimated from quadrature samples");
                }
            }
            BoundaryOperatorSpec::Kernel(_) => v.note = "integral operator on L^2(boundary)".into(),
            BoundaryOperatorSpec::RankOne { .. } => v.note = "rank-one operator on L^2(boundary)".into(),
            BoundaryOperatorSpec::Composite(_) | BoundaryOperatorSpec::Abstract(_) => unreachable!("flattened and validated"),
        }
        if class == ThetaClass::Theta3 {
            let p = proxy.get_or_insert_with(|| h_half_proxy(mesh, traversal));
            match theta3_norm(mesh, traversal, part, p) {
                Ok(n) => {
                    v.theta3_norm_proxy = Some(n);
                    if n > delta {
                        v.pass = false;
                        v.note = format!("proxy norm {n:.3e} exceeds delta = {delta}");
                    }
                }
                Err(e) => {
                    v.pass = false;
                    v.note = format!("proxy norm unavailable: {e}");
                }
            }
        }
        parts.push(v);
    }
    notes.push(format!("maximal turning angle of the boundary: {:.4} rad", max_turning_angle(traversal, mesh)));
    let pass = parts.iter().all(|p| p.pass);
    AdmissibilityVerdict { pass, parts, delta, heuristic: true, notes }
}

fn theta3_norm(
    mesh: &TriangleMesh,
    traversal: &BoundaryTraversal,
    part: &BoundaryOperatorSpec,
    proxy: &Result<(Vec<usize>, DMatrix<f64>)>,
) -> Result<f64> {
    let (bnodes, h) = proxy.as_ref().map_err(|e| Error::BoundaryOperator(e.to_string()))?;
    let b = boundary_block(&leaf_or_sum(mesh, traversal, part)?, bnodes);
    let (vals, _) = dense::generalized_eigen(&b, h)?;
    Ok(vals.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Largest deviation from a straight angle between consecutive boundary
/// edges, a crude stand-in for the Lipschitz character.
fn max_turning_angle(traversal: &BoundaryTraversal, mesh: &TriangleMesh) -> f64 {
    let mut worst: f64 = 0.0;
    for lp in &traversal.loops {
        let n = lp.edges.len();
        for i in 0..n {
            let (e0, e1) = (&lp.edges[i], &lp.edges[(i + 1) % n]);
            let d = |e: &crate::geometry::TraversalEdge| {
                let (a, b) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
                [b[0] - a[0], b[1] - a[1]]
            };
            let (u, v) = (d(e0), d(e1));
            let ang = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]).abs();
            worst = worst.max(ang);
        }
    }
    worst
}
