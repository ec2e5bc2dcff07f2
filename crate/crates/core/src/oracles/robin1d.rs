use std::f64::consts::PI;

use super::{OracleSpectrum, Provenance};
use crate::error::{Error, Result};

/// Characteristic function of `-u'' = mu u` on `(0, L)` with
/// `-u'(0) + theta u(0) = 0` and `u'(L) + theta u(L) = 0`:
///
/// `F(mu) = (theta^2 - mu) S(mu) + 2 theta C(mu)` with `S = sin(kL)/k`,
/// `C = cos(kL)`, `k = sqrt(mu)` (hyperbolic for `mu < 0`).
///
/// This is the boundary determinant of the solution `u = C(x) + theta S(x)`
/// that already satisfies the left condition. Unlike the usual
/// `tan`-based form it is entire in `mu`, so there are no poles to step
/// around. For `mu < 0` the value is scaled by `exp(-|k| L)` to avoid
/// overflow, which does not change its sign.
pub fn robin_characteristic(theta: f64, l: f64, mu: f64) -> f64 {
    let (s, c) = s_and_c(l, mu);
    (theta * theta - mu) * s + 2.0 * theta * c
}

fn s_and_c(l: f64, mu: f64) -> (f64, f64) {
    if mu > 0.0 {
        let k = mu.sqrt();
        ((k * l).sin() / k, (k * l).cos())
    } else if mu < 0.0 {
        let k = (-mu).sqrt();
        let e = (-2.0 * k * l).exp();
        ((1.0 - e) / (2.0 * k), (1.0 + e) / 2.0)
    } else {
        (l, 1.0)
    }
}

/// Interior zeros on `(0, L)` of the candidate eigenfunction
/// `u = C(x) + theta S(x)`. At the `i`-th eigenvalue (0-based) this is `i`
/// by Sturm oscillation, which certifies that no root was skipped.
pub fn robin_zero_count(theta: f64, l: f64, mu: f64) -> usize {
    if mu > 0.0 {
        // u is proportional to sin(kx + psi), psi in (0, pi)
        let k = mu.sqrt();
        let psi = 1f64.atan2(theta / k);
        let top = k * l + psi;
        let n = (top / PI).floor() as usize;
        // a zero exactly at x = L does not count
        if (top / PI - n as f64).abs() < 1e-12 {
            n.saturating_sub(1)
        } else {
            n
        }
    } else if theta >= 0.0 {
        0
    } else if mu == 0.0 {
        usize::from(-1.0 / theta < l)
    } else {
        // cosh(kx) + theta sinh(kx)/k = 0  <=>  tanh(kx) = k/|theta|
        let k = (-mu).sqrt();
        let r = k / -theta;
        usize::from(r < 1.0 && r.atanh() / k < l)
    }
}

/// Smallest `count` eigenvalues of the Robin interval.
pub fn robin_1d(theta: f64, l: f64, count: usize) -> Result<OracleSpectrum> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("interval length must be positive, got {l}")));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("theta must be finite".into()));
    }
    let label = |k: usize| format!("({k})");
    if theta == 0.0 {
        let pairs = (0..count).map(|k| ((k as f64 * PI / l).powi(2), label(k))).collect();
        return Ok(OracleSpectrum::from_pairs(pairs, count, Provenance::ClosedForm));
    }
    let f = |mu: f64| robin_characteristic(theta, l, mu);
    let mut roots = Vec::with_capacity(count);
    for subdivisions in [64usize, 512, 4096] {
        roots.clear();
        // nonpositive branch: mu = -kappa^2 on kappa in (0, kappa_max]
        if theta < 0.0 {
            let kappa_max = 2.0 * (-theta + 2.0 / l) + 1.0;
            let n = 4 * subdivisions;
            let mut prev = (0.0, f(0.0));
            if prev.1 == 0.0 {
                roots.push(0.0);
            }
            let mut found = Vec::new();
            for i in 1..=n {
                let kappa = kappa_max * i as f64 / n as f64;
                let mu = -kappa * kappa;
                let v = f(mu);
                if v != 0.0 && prev.1 != 0.0 && v.signum() != prev.1.signum() {
                    found.push(bisect(&f, mu, prev.0)?);
                } else if v == 0.0 {
                    found.push(mu);
                }
                prev = (mu, v);
            }
            found.reverse();
            let zero_root = roots.pop();
            roots.extend(found);
            roots.extend(zero_root);
        }
        // positive branch, bracket by bracket
        let mut k = 0usize;
        while roots.len() < count {
            let lo = (k as f64 * PI / l).powi(2);
            let hi = ((k + 1) as f64 * PI / l).powi(2);
            let mut prev = (lo, f(lo));
            for i in 1..=subdivisions {
                let mu = lo + (hi - lo) * i as f64 / subdivisions as f64;
                let v = f(mu);
                if prev.1 != 0.0 && v != 0.0 && v.signum() != prev.1.signum() {
                    roots.push(bisect(&f, prev.0, mu)?);
                } else if v == 0.0 && i < subdivisions {
                    roots.push(mu);
                }
                prev = (mu, v);
            }
            k += 1;
            if k > 4 * count + 16 {
                return Err(Error::RootFinding(format!("brackets exhausted with {} of {count} roots", roots.len())));
            }
        }
        roots.truncate(count);
        if roots.iter().enumerate().all(|(i, &mu)| robin_zero_count(theta, l, mu) == i) {
            let pairs = roots.iter().enumerate().map(|(i, &mu)| (mu, label(i))).collect();
            return Ok(OracleSpectrum::from_pairs(pairs, count, Provenance::TranscendentalRootfind));
        }
    }
    Err(Error::RootFinding(format!("roots for theta = {theta}, L = {l} fail the oscillation check")))
}

/// Bisection on a sign-changing bracket down to adjacent floats or
/// `1e-13` relative width.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-13 * m.abs() {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_limit() {
        let s = robin_1d(0.0, 2.0, 4).unwrap();
        assert_eq!(s.eigenvalues[0], 0.0);
        assert!((s.eigenvalues[3] - (1.5 * PI).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_limit() {
        let s = robin_1d(1e6, 1.0, 3).unwrap();
        assert!((s.eigenvalues[0] - PI * PI).abs() < 1e-3);
    }

    #[test]
    fn negative_theta_has_negative_ground_state() {
        let s = robin_1d(-1.0, 1.0, 5).unwrap();
        assert!(s.eigenvalues[0] < 0.0);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        for &mu in &s.eigenvalues {
            let d = 1e-9 * mu.abs().max(1.0);
            let (l, r) = (robin_characteristic(-1.0, 1.0, mu - d), robin_characteristic(-1.0, 1.0, mu + d));
            assert!(l * r <= 0.0, "no sign change at {mu}");
        }
    }

    #[test]
    fn strongly_negative_theta_has_two_negative_modes() {
        let s = robin_1d(-5.0, 1.0, 3).unwrap();
        assert!(s.eigenvalues[0] < 0.0 && s.eigenvalues[1] < 0.0 && s.eigenvalues[2] > 0.0);
        // both close to the half-line value -theta^2
        assert!((s.eigenvalues[0] + 25.0).abs() < 1.0);
    }

    #[test]
    fn monotone_in_theta() {
        let thetas = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let spectra: Vec<_> = thetas.iter().map(|&t| robin_1d(t, 1.0, 6).unwrap().eigenvalues).collect();
        for w in spectra.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a < b));
        }
    }
}
