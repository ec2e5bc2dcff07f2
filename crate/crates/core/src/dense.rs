//! Dense symmetric kernels: the generalized eigen solve used below the
//! sparse threshold and a Bunch-Kaufman LDL^T for inertia.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ldlt::Inertia;

/// Generalized symmetric-definite eigenproblem `K x = lambda M x`.
///
/// Reduces with the Cholesky factor of `M` to a standard symmetric problem,
/// which is then tridiagonalized and diagonalized by implicit QR sweeps.
/// Returns ascending eigenvalues and mass-orthonormal eigenvectors (columns).
pub fn generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension("generalized_eigen expects square matrices of equal size".into()));
    }
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or_else(|| {
        let pivot = (0..n).find(|&i| m[(i, i)] <= 0.0).unwrap_or(0);
        Error::NotPositiveDefinite { pivot, value: m[(pivot, pivot)] }
    })?;
    let l = chol.l();
    // C = L^{-1} K L^{-T}
    let linv_k = l.solve_lower_triangular(k).expect("Cholesky factor is nonsingular");
    let c = l.solve_lower_triangular(&linv_k.transpose()).expect("Cholesky factor is nonsingular");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    let lt = l.transpose();
    for (col, &i) in idx.iter().enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let x = lt.solve_upper_triangular(&y).expect("Cholesky factor is nonsingular");
        vecs.set_column(col, &x);
    }
    Ok((values, vecs))
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let a = (a + a.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Symmetric positive semidefinite square root by eigendecomposition.
pub fn psd_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let a = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let s = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&s) * eig.eigenvectors.transpose()
}

/// Bunch-Kaufman symmetric indefinite factorization `P A P^T = L D L^T` with
/// 1x1 and 2x2 pivots; only the inertia of `D` is returned.
pub fn bunch_kaufman_inertia(a: &DMatrix<f64>) -> Result<Inertia> {
    let n = a.nrows();
    let mut w = (a + a.transpose()) * 0.5;
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let scale = w.amax().max(f64::MIN_POSITIVE);
    let mut inertia = Inertia::default();
    let mut k = 0;
    while k < n {
        let akk = w[(k, k)].abs();
        let (r, colmax) = (k + 1..n).map(|i| (i, w[(i, k)].abs())).fold((k, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        if akk.max(colmax) <= 64.0 * f64::EPSILON * scale {
            return Err(Error::FactorizationBreakdown(k));
        }
        let size;
        if akk >= alpha * colmax {
            size = 1;
        } else {
            let rowmax = (k..n).filter(|&j| j != r).map(|j| w[(r, j)].abs()).fold(0.0, f64::max);
            if akk * rowmax >= alpha * colmax * colmax {
                size = 1;
            } else if w[(r, r)].abs() >= alpha * rowmax {
                w.swap_rows(k, r);
                w.swap_columns(k, r);
                size = 1;
            } else {
                w.swap_rows(k + 1, r);
                w.swap_columns(k + 1, r);
                size = 2;
            }
        }
        if size == 1 {
            let d = w[(k, k)];
            if d > 0.0 {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
            for i in k + 1..n {
                let lik = w[(i, k)] / d;
                for j in k + 1..=i {
                    let v = w[(i, j)] - lik * w[(j, k)];
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            k += 1;
        } else {
            let (d11, d21, d22) = (w[(k, k)], w[(k + 1, k)], w[(k + 1, k + 1)]);
            let det = d11 * d22 - d21 * d21;
            if det < 0.0 {
                inertia.positive += 1;
                inertia.negative += 1;
            } else if d11 + d22 > 0.0 {
                inertia.positive += 2;
            } else {
                inertia.negative += 2;
            }
            for i in k + 2..n {
                let (a1, a2) = (w[(i, k)], w[(i, k + 1)]);
                let l1 = (a1 * d22 - a2 * d21) / det;
                let l2 = (a2 * d11 - a1 * d21) / det;
                for j in k + 2..=i {
                    let v = w[(i, j)] - l1 * w[(j, k)] - l2 * w[(j, k + 1)];
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            k += 2;
        }
    }
    Ok(inertia)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_generalized_problem() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (vals, vecs) = generalized_eigen(&k, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(vals.len(), 3);
        for (v, e) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mass_orthonormal_vectors() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) / 6.0;
        let (vals, x) = generalized_eigen(&k, &m).unwrap();
        let gram = x.transpose() * &m * &x;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
        let resid = &k * &x - &m * &x * DMatrix::from_diagonal(&DVector::from_vec(vals));
        assert!(resid.amax() < 1e-12);
    }

    #[test]
    fn indefinite_inertia_matches_eigenvalues() {
        // needs a 2x2 pivot: zero diagonal
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 2.0, -1.0]);
        let ev = symmetric_eigenvalues(&a);
        let neg = ev.iter().filter(|&&v| v < 0.0).count();
        let s = bunch_kaufman_inertia(&a).unwrap();
        assert_eq!(s.negative, neg);
        assert_eq!(s.positive, 3 - neg);
    }

    #[test]
    fn not_positive_definite_mass() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(generalized_eigen(&DMatrix::identity(2, 2), &m), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = psd_sqrt(&a);
        assert!((&r * &r - a).amax() < 1e-13);
    }
}
