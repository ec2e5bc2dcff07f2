//! P1 Galerkin matrices: stiffness, consistent mass, boundary-weighted and
//! nonlocal boundary forms, Dirichlet reduction and the Neumann-trace residual.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, BoundaryTraversal, TriangleMesh};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Stiffness,
    Mass,
    BoundaryWeighted,
    Nonlocal,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Psd,
    Pd,
    Nsd,
    Indefinite,
    Unknown,
}

/// Sparse symmetric matrix of a sesquilinear form on the P1 space.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    pub matrix: CsrMatrix,
    pub kind: FormKind,
    pub definiteness: Definiteness,
}

impl DiscreteForm {
    pub fn new(matrix: CsrMatrix, kind: FormKind, definiteness: Definiteness) -> Self {
        Self { matrix, kind, definiteness }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(CsrMatrix::zeros(n), FormKind::BoundaryWeighted, Definiteness::Psd)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matrix.quad_form(x)
    }

    /// Sum of two forms; the definiteness hint survives only when both agree.
    pub fn plus(&self, other: &DiscreteForm) -> Result<DiscreteForm> {
        use Definiteness::*;
        let def = match (self.definiteness, other.definiteness) {
            (Pd, Psd) | (Psd, Pd) | (Pd, Pd) => Pd,
            (Psd, Psd) => Psd,
            (Nsd, Nsd) => Nsd,
            _ => Unknown,
        };
        Ok(DiscreteForm::new(self.matrix.add(&other.matrix)?, FormKind::Composite, def))
    }

    pub fn scaled(&self, alpha: f64) -> DiscreteForm {
        use Definiteness::*;
        let def = match (self.definiteness, alpha.partial_cmp(&0.0)) {
            (d, Some(std::cmp::Ordering::Greater)) => d,
            (Psd | Pd, Some(std::cmp::Ordering::Less)) => Nsd,
            (Nsd, Some(std::cmp::Ordering::Less)) => Psd,
            (_, Some(std::cmp::Ordering::Equal)) => Psd,
            _ => Unknown,
        };
        DiscreteForm::new(self.matrix.scaled(alpha), self.kind, def)
    }

    /// Relative symmetry defect `max|A - A^T| / max|A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.matrix.max_abs();
        if m == 0.0 {
            0.0
        } else {
            self.matrix.symmetry_defect() / m
        }
    }
}

fn element_gradients(mesh: &TriangleMesh, t: usize) -> Result<([f64; 3], [f64; 3], f64)> {
    let [p0, p1, p2] = mesh.triangles[t].map(|i| mesh.nodes[i]);
    let area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    if !(area > 0.0) {
        return Err(Error::DegenerateTriangle(t));
    }
    // grad(phi_i) = (b_i, c_i) / (2 area)
    let b = [p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]];
    let c = [p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]];
    Ok((b, c, area))
}

/// Element stiffness matrix of a single triangle.
pub fn element_stiffness(p: [[f64; 2]; 3]) -> Result<[[f64; 3]; 3]> {
    let mesh = TriangleMesh {
        nodes: p.to_vec(),
        triangles: vec![[0, 1, 2]],
        boundary_edges: Vec::new(),
        boundary_node: vec![true; 3],
        level: 0,
        h: 0.0,
    };
    let (b, c, area) = element_gradients(&mesh, 0)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// `A_ij = int grad(phi_i) . grad(phi_j)`, exact for P1.
pub fn assemble_stiffness(mesh: &TriangleMesh) -> Result<DiscreteForm> {
    let n = mesh.n_nodes();
    let mut tb = TripletBuilder::with_capacity(n, 9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (b, c, area) = element_gradients(mesh, t)?;
        for i in 0..3 {
            for j in 0..3 {
                tb.push(tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
            }
        }
    }
    Ok(DiscreteForm::new(tb.build(), FormKind::Stiffness, Definiteness::Psd))
}

/// Consistent mass matrix `M_ij = int phi_i phi_j`, exact for P1.
pub fn assemble_mass(mesh: &TriangleMesh) -> Result<DiscreteForm> {
    let n = mesh.n_nodes();
    let mut tb = TripletBuilder::with_capacity(n, 9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (_, _, area) = element_gradients(mesh, t)?;
        for i in 0..3 {
            for j in 0..3 {
                let f = if i == j { 2.0 } else { 1.0 };
                tb.push(tri[i], tri[j], f * area / 12.0);
            }
        }
    }
    Ok(DiscreteForm::new(tb.build(), FormKind::Mass, Definiteness::Pd))
}

/// `B_ij = int_{boundary} theta phi_i phi_j`, two-point Gauss per edge.
pub fn assemble_boundary_weighted(
    mesh: &TriangleMesh,
    traversal: &BoundaryTraversal,
    theta: &dyn Fn(&BoundaryPoint) -> f64,
) -> Result<DiscreteForm> {
    let mut tb = TripletBuilder::with_capacity(mesh.n_nodes(), 4 * traversal.n_edges());
    let mut all_nonneg = true;
    let mut all_nonpos = true;
    for (bp, q, e) in traversal.quad_points() {
        let th = theta(&bp);
        if !th.is_finite() {
            return Err(Error::NonFinite(format!("boundary weight at s = {}", bp.s)));
        }
        all_nonneg &= th >= 0.0;
        all_nonpos &= th <= 0.0;
        for a in 0..2 {
            for b in 0..2 {
                tb.push(e.nodes[a], e.nodes[b], q.weight * th * q.basis[a] * q.basis[b]);
            }
        }
    }
    let def = match (all_nonneg, all_nonpos) {
        (true, true) => Definiteness::Psd,
        (true, false) => Definiteness::Psd,
        (false, true) => Definiteness::Nsd,
        (false, false) => Definiteness::Indefinite,
    };
    Ok(DiscreteForm::new(tb.build(), FormKind::BoundaryWeighted, def))
}

/// Boundary mass matrix (`theta = 1`).
pub fn assemble_boundary_mass(mesh: &TriangleMesh, traversal: &BoundaryTraversal) -> Result<DiscreteForm> {
    assemble_boundary_weighted(mesh, traversal, &|_| 1.0)
}

/// Values of the boundary hat functions at the quadrature points:
/// one `(node, weight * phi)` pair list per quadrature point, plus the points.
pub(crate) fn weighted_trace_rows(traversal: &BoundaryTraversal) -> Vec<(BoundaryPoint, [(usize, f64); 2])> {
    traversal.quad_points().map(|(bp, q, e)| (bp, [(e.nodes[0], q.weight * q.basis[0]), (e.nodes[1], q.weight * q.basis[1])])).collect()
}

/// `B_ij = int int k(s,t) phi_i(s) phi_j(t) ds dt` with tensor two-point
/// Gauss per edge pair. The kernel is symmetrized before use.
pub fn assemble_nonlocal(mesh: &TriangleMesh, traversal: &BoundaryTraversal, kernel: &dyn Fn(f64, f64) -> f64) -> Result<DiscreteForm> {
    let rows = weighted_trace_rows(traversal);
    let nq = rows.len();
    // dense kernel on quadrature points
    let mut kq = vec![0.0; nq * nq];
    for a in 0..nq {
        for b in a..nq {
            let (s, t) = (rows[a].0.s, rows[b].0.s);
            let v = 0.5 * (kernel(s, t) + kernel(t, s));
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("kernel at ({s}, {t})")));
            }
            kq[a * nq + b] = v;
            kq[b * nq + a] = v;
        }
    }
    let bnodes = mesh.boundary_nodes();
    let mut local = vec![usize::MAX; mesh.n_nodes()];
    for (k, &i) in bnodes.iter().enumerate() {
        local[i] = k;
    }
    let nb = bnodes.len();
    let mut dense = vec![0.0; nb * nb];
    for a in 0..nq {
        for b in 0..nq {
            let kv = kq[a * nq + b];
            if kv == 0.0 {
                continue;
            }
            for &(i, wi) in &rows[a].1 {
                for &(j, wj) in &rows[b].1 {
                    dense[local[i] * nb + local[j]] += kv * wi * wj;
                }
            }
        }
    }
    let mut tb = TripletBuilder::with_capacity(mesh.n_nodes(), nb * nb);
    for (a, &i) in bnodes.iter().enumerate() {
        for (b, &j) in bnodes.iter().enumerate() {
            let v = 0.5 * (dense[a * nb + b] + dense[b * nb + a]);
            if v != 0.0 {
                tb.push(i, j, v);
            }
        }
    }
    Ok(DiscreteForm::new(tb.build(), FormKind::Nonlocal, Definiteness::Unknown))
}

/// `B = c g_h g_h^T` with `(g_h)_i = int g phi_i`, the Galerkin matrix of
/// `Theta f = c <g, f> g`.
pub fn assemble_rank_one(
    mesh: &TriangleMesh,
    traversal: &BoundaryTraversal,
    g: &dyn Fn(&BoundaryPoint) -> f64,
    c: f64,
) -> Result<DiscreteForm> {
    let mut gh = vec![0.0; mesh.n_nodes()];
    for (bp, w) in weighted_trace_rows(traversal) {
        let gv = g(&bp);
        if !gv.is_finite() {
            return Err(Error::NonFinite(format!("rank-one profile at s = {}", bp.s)));
        }
        for (i, wi) in w {
            gh[i] += gv * wi;
        }
    }
    let support: Vec<usize> = (0..gh.len()).filter(|&i| gh[i] != 0.0).collect();
    let mut tb = TripletBuilder::with_capacity(mesh.n_nodes(), support.len() * support.len());
    for &i in &support {
        for &j in &support {
            tb.push(i, j, c * gh[i] * gh[j]);
        }
    }
    let def = if c > 0.0 {
        Definiteness::Psd
    } else if c < 0.0 {
        Definiteness::Nsd
    } else {
        Definiteness::Psd
    };
    Ok(DiscreteForm::new(tb.build(), FormKind::Nonlocal, def))
}

/// Stiffness and mass restricted to interior nodes.
#[derive(Debug, Clone)]
pub struct DirichletReduction {
    /// `interior[k]` is the mesh node of reduced unknown `k`.
    pub interior: Vec<usize>,
    pub stiffness: DiscreteForm,
    pub mass: DiscreteForm,
}

impl DirichletReduction {
    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    /// Extends a reduced vector by zero to all mesh nodes.
    pub fn extend(&self, reduced: &[f64], n_nodes: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_nodes];
        for (k, &i) in self.interior.iter().enumerate() {
            full[i] = reduced[k];
        }
        full
    }
}

/// Eliminates boundary unknowns (homogeneous Dirichlet condition).
pub fn reduce_dirichlet(stiffness: &DiscreteForm, mass: &DiscreteForm, mesh: &TriangleMesh) -> Result<DirichletReduction> {
    if stiffness.dim() != mesh.n_nodes() || mass.dim() != mesh.n_nodes() {
        return Err(Error::Dimension("forms and mesh disagree".into()));
    }
    let interior = mesh.interior_nodes();
    if interior.is_empty() {
        return Err(Error::NoInteriorNodes);
    }
    Ok(DirichletReduction {
        stiffness: DiscreteForm::new(stiffness.matrix.principal_submatrix(&interior), FormKind::Stiffness, Definiteness::Pd),
        mass: DiscreteForm::new(mass.matrix.principal_submatrix(&interior), FormKind::Mass, Definiteness::Pd),
        interior,
    })
}

/// Prolongation of a P1 function to the once-refined mesh (exact for nested meshes).
pub fn prolongate(coarse: &TriangleMesh, fine: &TriangleMesh, u: &[f64]) -> Result<Vec<f64>> {
    if fine.n_nodes() < coarse.n_nodes() || u.len() != coarse.n_nodes() {
        return Err(Error::Dimension("prolongation expects the refined mesh of the coarse mesh".into()));
    }
    let mut out = vec![f64::NAN; fine.n_nodes()];
    out[..coarse.n_nodes()].copy_from_slice(u);
    // midpoint nodes: every fine triangle [a, ab, ca] has a coarse vertex first
    for tri in fine.triangles.chunks(4) {
        // children order: [a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]
        let (a, ab, ca) = (tri[0][0], tri[0][1], tri[0][2]);
        let (b, bc) = (tri[1][1], tri[1][2]);
        let c = tri[2][2];
        for (m, p, q) in [(ab, a, b), (bc, b, c), (ca, c, a)] {
            if out[m].is_nan() {
                out[m] = 0.5 * (out[p] + out[q]);
            }
        }
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidMesh("fine mesh is not the red refinement of the coarse mesh".into()));
    }
    Ok(out)
}

/// Weak Neumann-trace residual of a discrete Robin eigenpair.
///
/// Forms `r(phi) = a(u, phi) - lambda (u, phi) + <phi, Theta u>` for the
/// boundary hat functions `phi` of the once-refined mesh and returns its
/// norm dual to the boundary mass matrix, `sqrt(r^T T^{-1} r)`. The pair must
/// satisfy the discrete equations on `mesh` itself (checked first).
pub fn neumann_trace_residual(
    mesh: &TriangleMesh,
    u: &[f64],
    lambda: f64,
    theta_form: &dyn Fn(&TriangleMesh, &BoundaryTraversal) -> Result<DiscreteForm>,
) -> Result<f64> {
    let trav = BoundaryTraversal::new(mesh)?;
    let a = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh)?;
    let b = theta_form(mesh, &trav)?;
    let k = a.matrix.add(&b.matrix)?;
    let ku = k.mul_vec(u);
    let mu = m.matrix.mul_vec(u);
    let res: Vec<f64> = ku.iter().zip(&mu).map(|(x, y)| x - lambda * y).collect();
    let umax = u.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let scale = (k.max_abs() + lambda.abs() * m.matrix.max_abs()) * umax;
    let rel = res.iter().fold(0.0f64, |s, v| s.max(v.abs())) / scale.max(f64::MIN_POSITIVE);
    if rel > 1e-6 {
        return Err(Error::NotAnEigenpair(rel));
    }

    let fine = mesh.refine();
    let ftrav = BoundaryTraversal::new(&fine)?;
    let uf = prolongate(mesh, &fine, u)?;
    let kf = assemble_stiffness(&fine)?.matrix.add(&theta_form(&fine, &ftrav)?.matrix)?;
    let mf = assemble_mass(&fine)?;
    let kfu = kf.mul_vec(&uf);
    let mfu = mf.matrix.mul_vec(&uf);
    let bnodes = fine.boundary_nodes();
    let r: Vec<f64> = bnodes.iter().map(|&i| kfu[i] - lambda * mfu[i]).collect();
    let t = assemble_boundary_mass(&fine, &ftrav)?.matrix.principal_submatrix(&bnodes).to_dense();
    let chol = nalgebra::Cholesky::new(t).ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
    let rv = nalgebra::DVector::from_vec(r);
    let z = chol.solve(&rv);
    Ok(rv.dot(&z).max(0.0).sqrt())
}

/// Residual of the same functional against the boundary hats of `mesh` itself.
pub fn discrete_trace_residual(mesh: &TriangleMesh, k: &CsrMatrix, m: &CsrMatrix, u: &[f64], lambda: f64) -> Result<f64> {
    let trav = BoundaryTraversal::new(mesh)?;
    let bnodes = mesh.boundary_nodes();
    let ku = k.mul_vec(u);
    let mu = m.mul_vec(u);
    let r: Vec<f64> = bnodes.iter().map(|&i| ku[i] - lambda * mu[i]).collect();
    let t: DMatrix<f64> = assemble_boundary_mass(mesh, &trav)?.matrix.principal_submatrix(&bnodes).to_dense();
    let chol = nalgebra::Cholesky::new(t).ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
    let rv = nalgebra::DVector::from_vec(r);
    Ok(rv.dot(&chol.solve(&rv)).max(0.0).sqrt())
}
