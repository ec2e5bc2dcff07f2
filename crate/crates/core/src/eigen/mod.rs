//! Generalized symmetric eigenproblems `K x = lambda M x`, eigenvalue
//! counting (by enumeration and by inertia) and Richardson extrapolation.

mod counting;
mod lanczos;
mod richardson;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use counting::{counting_function, inertia_count, InertiaCount, InertiaCounter};
pub use richardson::{observed_order, richardson, ExtrapolatedSpectrum, MIN_ORDER, SAFETY};

use crate::dense;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Relative gap below which neighbouring eigenvalues are merged into one
/// multiple eigenvalue.
pub const MERGE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Problems up to this dimension use the dense path.
    pub dense_threshold: usize,
    pub want_vectors: bool,
    /// Maximum number of Lanczos restarts.
    pub max_restarts: usize,
    /// Relative residual tolerance.
    pub rtol: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { dense_threshold: 400, want_vectors: true, max_restarts: 60, rtol: 1e-9, seed: 42 }
    }
}

/// What a spectrum was computed for.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub domain: String,
    pub boundary_condition: String,
    pub theta_hash: String,
    pub level: usize,
    pub h: f64,
}

/// Smallest eigenvalues of a pencil, ascending, with optional
/// mass-orthonormal eigenvectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    pub descriptor: ProblemDescriptor,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub requested: usize,
    /// Dimension of the pencil; the spectrum is complete when it equals
    /// the number of returned eigenvalues.
    pub dim: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.eigenvalues.len() == self.dim
    }

    pub fn largest(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// Eigenvalues with multiplicities merged at relative gap `MERGE_RTOL`.
    pub fn merged(&self) -> Vec<(f64, usize)> {
        merge_multiplicities(&self.eigenvalues)
    }

    /// Multiplicity of the cluster containing raw eigenvalue `i`.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.eigenvalues.len());
        for (_, m) in self.merged() {
            out.extend(std::iter::repeat_n(m, m));
        }
        out
    }

    /// CSV with header `index,eigenvalue,multiplicity,error_estimate`.
    /// Indices are 1-based; unknown error estimates are left empty.
    pub fn to_csv(&self, errors: Option<&[f64]>) -> String {
        spectrum_csv(&self.eigenvalues, &self.multiplicities(), errors, None)
    }
}

pub(crate) fn merge_multiplicities(values: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            (b - a).abs() > MERGE_RTOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        };
        if split {
            let n = i - start;
            let mean = values[start..i].iter().sum::<f64>() / n as f64;
            out.push((mean, n));
            start = i;
        }
    }
    out
}

pub(crate) fn spectrum_csv(values: &[f64], mult: &[usize], errors: Option<&[f64]>, labels: Option<&[String]>) -> String {
    let mut out = String::from("index,eigenvalue,multiplicity,error_estimate");
    if labels.is_some() {
        out.push_str(",mode_label");
    }
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        write!(out, "{},{:.16e},{},", i + 1, v, mult[i]).unwrap();
        if let Some(e) = errors.and_then(|e| e.get(i)) {
            write!(out, "{e:.16e}").unwrap();
        }
        if let Some(l) = labels {
            write!(out, ",{}", l[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Smallest `count` eigenvalues of `(K, M)`.
///
/// Dimensions up to `dense_threshold` reduce with the Cholesky factor of `M`
/// and diagonalize densely; larger problems use shift-invert Lanczos with a
/// sparse LDL^T of `K - sigma M`, full reorthogonalization, locking and an
/// inertia check that no eigenvalue below the returned window was skipped.
pub fn solve(k: &CsrMatrix, m: &CsrMatrix, count: usize, opts: &SolveOptions) -> Result<Spectrum> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::Dimension(format!("K is {n}x{n}, M is {0}x{0}", m.dim())));
    }
    if count > n {
        return Err(Error::InvalidArgument(format!("requested {count} eigenvalues of a {n}-dimensional problem")));
    }
    let kmax = k.max_abs().max(f64::MIN_POSITIVE);
    if k.symmetry_defect() > 1e-12 * kmax || m.symmetry_defect() > 1e-12 * m.max_abs() {
        return Err(Error::InvalidArgument("pencil is not symmetric".into()));
    }
    let (values, vectors) = if n <= opts.dense_threshold {
        let (vals, vecs) = dense::generalized_eigen(&k.to_dense(), &m.to_dense())?;
        let vectors = opts.want_vectors.then(|| (0..count).map(|c| vecs.column(c).iter().copied().collect()).collect());
        (vals[..count].to_vec(), vectors)
    } else {
        let (vals, vecs) = lanczos::shift_invert_lanczos(k, m, count, opts)?;
        (vals, opts.want_vectors.then_some(vecs))
    };
    Ok(Spectrum { descriptor: ProblemDescriptor::default(), eigenvalues: values, eigenvectors: vectors, requested: count, dim: n })
}

/// `||K x - lambda M x||_{M^{-1}}` computed with a dense or sparse solve.
pub fn residual_norm(k: &CsrMatrix, m: &CsrMatrix, x: &[f64], lambda: f64) -> Result<f64> {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    let f = crate::ldlt::LdlFactor::new(m)?;
    let z = f.solve(&r);
    Ok(crate::sparse::dot(&r, &z).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mass, assemble_stiffness, reduce_dirichlet};
    use crate::geometry::{mesh_at_level, PolygonalDomain};

    #[test]
    fn diagonal_problem() {
        let k = CsrMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let s = solve(&k, &CsrMatrix::identity(3), 3, &SolveOptions::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        for (v, e) in s.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn merged_view() {
        let s = Spectrum { eigenvalues: vec![0.0, 1.0, 1.0 + 1e-12, 2.0], dim: 10, ..Default::default() };
        assert_eq!(s.merged().iter().map(|m| m.1).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert_eq!(s.multiplicities(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn csv_format() {
        let s = Spectrum { eigenvalues: vec![1.0, 2.5], dim: 2, ..Default::default() };
        assert_eq!(
            s.to_csv(Some(&[0.5, 0.25])),
            "index,eigenvalue,multiplicity,error_estimate\n1,1.0000000000000000e0,1,5.0000000000000000e-1\n2,2.5000000000000000e0,1,2.5000000000000000e-1\n"
        );
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let mesh = mesh_at_level(&PolygonalDomain::lshape(), 3).unwrap();
        let a = assemble_stiffness(&mesh).unwrap();
        let m = assemble_mass(&mesh).unwrap();
        let red = reduce_dirichlet(&a, &m, &mesh).unwrap();
        let dense = solve(&red.stiffness.matrix, &red.mass.matrix, 12, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { dense_threshold: 0, ..Default::default() };
        let lz = solve(&red.stiffness.matrix, &red.mass.matrix, 12, &opts).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&lz.eigenvalues) {
            assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
        }
        // Neumann on a D4-symmetric square: exact double eigenvalues must both be found
        let sq = mesh_at_level(&PolygonalDomain::unit_square(), 3).unwrap();
        let a = assemble_stiffness(&sq).unwrap();
        let m = assemble_mass(&sq).unwrap();
        let dense = solve(&a.matrix, &m.matrix, 10, &SolveOptions::default()).unwrap();
        let lz = solve(&a.matrix, &m.matrix, 10, &opts).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&lz.eigenvalues) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
        }
        let x = lz.eigenvectors.as_ref().unwrap();
        for i in 0..x.len() {
            for j in 0..x.len() {
                let g = m.matrix.bilinear(&x[i], &x[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() <= 1e-8, "gram[{i}][{j}] = {g}");
            }
        }
    }

    #[test]
    fn count_exceeding_dimension() {
        let k = CsrMatrix::identity(2);
        assert!(solve(&k, &k, 3, &SolveOptions::default()).is_err());
    }
}
