use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolveOptions;
use crate::error::{Error, Result};
use crate::ldlt::{LdlFactor, Ordering};
use crate::sparse::{dot, CsrMatrix};

/// Factor of `K - sigma M` together with the shift.
struct ShiftedOperator {
    sigma: f64,
    factor: LdlFactor,
}

/// Finds a shift strictly below the spectrum: starting at `-1`, the shift
/// moves down geometrically until `K - sigma M` is positive definite.
fn shift_below_spectrum(k: &CsrMatrix, m: &CsrMatrix, ord: &Ordering) -> Result<ShiftedOperator> {
    let mut sigma = -1.0;
    for _ in 0..200 {
        let a = k.axpby(1.0, m, -sigma)?;
        match LdlFactor::with_ordering(&a, ord) {
            Ok(f) if f.inertia().negative == 0 => return Ok(ShiftedOperator { sigma, factor: f }),
            Ok(_) | Err(Error::FactorizationBreakdown(_)) => sigma *= 4.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence("no shift below the spectrum was found".into()))
}

/// Counts eigenvalues strictly below `mu`, nudging `mu` down on breakdown.
fn count_below(k: &CsrMatrix, m: &CsrMatrix, ord: &Ordering, mut mu: f64) -> Result<usize> {
    let scale = mu.abs().max(1.0);
    for attempt in 0..8 {
        let a = k.axpby(1.0, m, -mu)?;
        match LdlFactor::with_ordering(&a, ord) {
            Ok(f) => return Ok(f.inertia().negative),
            Err(Error::FactorizationBreakdown(_)) => {
                mu -= 1e-10 * scale * 4f64.powi(attempt);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence(format!("inertia at {mu} kept breaking down")))
}

fn m_orthogonalize(w: &mut [f64], basis: &[Vec<f64>], mbasis: &[Vec<f64>]) {
    for (q, mq) in basis.iter().zip(mbasis) {
        let c = dot(w, mq);
        w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
    }
}

/// Smallest `count` eigenpairs of `(K, M)` by shift-invert Lanczos.
///
/// The operator `(K - sigma M)^{-1} M` is self-adjoint in the `M` inner
/// product; its largest eigenvalues `1/(lambda - sigma)` correspond to the
/// smallest `lambda`. Converged Ritz pairs are locked and later runs are kept
/// `M`-orthogonal to them. Once `count` pairs are locked, the inertia of
/// `K - mu M` just above the last one must equal the number of locked values
/// below `mu`; otherwise a missing copy of a multiple eigenvalue is hunted
/// with a fresh random start.
pub(super) fn shift_invert_lanczos(k: &CsrMatrix, m: &CsrMatrix, count: usize, opts: &SolveOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = k.dim();
    if count == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let ord = Ordering::amd(&k.axpby(1.0, m, 1.0)?);
    let op = shift_below_spectrum(k, m, &ord)?;
    let mfac = LdlFactor::with_ordering(m, &ord)?;
    let spectral_scale = k.max_abs() / m.max_abs().max(f64::MIN_POSITIVE);
    let abs_tol = 1e-12 * spectral_scale.max(1.0);
    debug!("lanczos n={n} count={count} sigma={}", op.sigma);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut locked_m: Vec<Vec<f64>> = Vec::new();
    let mut restart: Option<Vec<f64>> = None;
    let block = (3 * count + 30).max(60);

    for round in 0..=opts.max_restarts {
        let locked_vecs: Vec<Vec<f64>> = locked.iter().map(|l| l.1.clone()).collect();
        let room = n - locked.len();
        if room == 0 {
            break;
        }
        let steps = block.min(room);
        let mut v = restart.take().unwrap_or_else(|| (0..n).map(|_| rng.random::<f64>() - 0.5).collect());
        m_orthogonalize(&mut v, &locked_vecs, &locked_m);
        m_orthogonalize(&mut v, &locked_vecs, &locked_m);
        let nv = m.quad_form(&v).sqrt();
        if !(nv > 0.0) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);

        let mut q: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut mq: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut alpha = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        let mut mv = m.mul_vec(&v);
        for j in 0..steps {
            q.push(v);
            mq.push(mv);
            let mut w = op.factor.solve(&mq[j]);
            let a = dot(&w, &mq[j]);
            alpha.push(a);
            for _ in 0..2 {
                m_orthogonalize(&mut w, &locked_vecs, &locked_m);
                m_orthogonalize(&mut w, &q, &mq);
            }
            let mw = m.mul_vec(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();
            if j + 1 == steps || b <= 1e-13 * a.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
            mv = mw.iter().map(|x| x / b).collect();
        }

        // Ritz pairs of the tridiagonal projection, largest theta first
        let d = alpha.len();
        let mut t = DMatrix::zeros(d, d);
        for i in 0..d {
            t[(i, i)] = alpha[i];
            if i + 1 < d {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let mut newly = 0;
        let mut first_unconverged: Option<Vec<f64>> = None;
        let need = count.saturating_sub(locked.len()).max(1);
        for &r in order.iter().take(need + 4) {
            let theta = eig.eigenvalues[r];
            if theta <= 0.0 {
                break;
            }
            let s = eig.eigenvectors.column(r);
            let mut x = vec![0.0; n];
            for (i, qi) in q.iter().enumerate() {
                let c = s[i];
                x.iter_mut().zip(qi).for_each(|(xv, qv)| *xv += c * qv);
            }
            m_orthogonalize(&mut x, &locked_vecs, &locked_m);
            let nx = m.quad_form(&x).sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            let mx = m.mul_vec(&x);
            let kx = k.mul_vec(&x);
            let lambda = dot(&x, &kx);
            let res: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
            let rn = dot(&res, &mfac.solve(&res)).max(0.0).sqrt();
            if rn <= opts.rtol * lambda.abs() + abs_tol {
                locked.push((lambda, x));
                locked_m.push(mx);
                newly += 1;
            } else {
                if first_unconverged.is_none() {
                    first_unconverged = Some(x);
                }
                break;
            }
        }
        debug!("round {round}: {d} steps, locked {newly} (total {})", locked.len());

        if locked.len() >= count {
            let mut values: Vec<f64> = locked.iter().map(|l| l.0).collect();
            values.sort_by(f64::total_cmp);
            let lam_c = values[count - 1];
            let above = values.get(count).copied();
            let gap = match above {
                Some(v) if v > lam_c => 0.5 * (v - lam_c),
                _ => 1e-6 * lam_c.abs().max(1.0),
            };
            let mu = lam_c + gap.min(1e-6 * lam_c.abs().max(1.0)).max(1e-9 * lam_c.abs().max(1.0));
            let below = count_below(k, m, &ord, mu)?;
            let have = locked.iter().filter(|l| l.0 < mu).count();
            if below <= have {
                locked.sort_by(|a, b| a.0.total_cmp(&b.0));
                locked.truncate(count);
                let (vals, vecs) = locked.into_iter().unzip();
                return Ok((vals, vecs));
            }
            debug!("inertia reports {below} eigenvalues below {mu}, only {have} found; continuing");
            restart = None;
        } else {
            restart = first_unconverged;
        }
    }
    Err(Error::NoConvergence(format!("Lanczos found {} of {count} eigenpairs", locked.len())))
}
