use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind `J_m(x)` for `x >= 0`.
///
/// Ascending series up to `x = 12`; beyond that, Miller's downward
/// recurrence normalized with `J_0 + 2 (J_2 + J_4 + ...) = 1`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j needs finite x >= 0, got {x}");
    if x <= SERIES_LIMIT {
        series(m, x)
    } else {
        miller(m, x)
    }
}

fn series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^m / m!
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

fn miller(m: usize, x: f64) -> f64 {
    let top = (m as f64).max(x);
    let mut n = (top + 30.0 + 3.0 * top.sqrt()) as usize;
    n += n % 2;
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (1..=n).rev() {
        // cur = J_k, next = J_{k+1} (unnormalized)
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let j = k - 1;
        if j == m {
            want = cur;
        }
        if j > 0 && j % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    norm += cur;
    want / norm
}

/// First `count` positive zeros of `J_m`, ascending.
///
/// Zeros are located by a sign-change scan whose end point comes from
/// McMahon's expansion, then refined by bisection to `1e-12`. Scanning from
/// below the first zero guarantees the indexing is right.
pub fn bessel_zeros(m: usize, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let f = |x: f64| bessel_j(m, x);
    let end = mcmahon(m, count) + 2.0 * PI;
    let step = 0.05;
    let mut x0 = if m == 0 { step } else { 0.9 * m as f64 }.max(step);
    let mut f0 = f(x0);
    while out.len() < count {
        if x0 > 2.0 * end + 50.0 {
            return Err(Error::RootFinding(format!("found {} of {count} zeros of J_{m}", out.len())));
        }
        let x1 = x0 + step;
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push(x1);
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            out.push(bisect(&f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// `k`-th positive zero `j_{m,k}` (1-based).
pub fn bessel_zero(m: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("Bessel zeros are indexed from 1".into()));
    }
    Ok(*bessel_zeros(m, k)?.last().expect("k >= 1"))
}

fn mcmahon(m: usize, k: usize) -> f64 {
    let mu = 4.0 * (m * m) as f64;
    let beta = (k as f64 + 0.5 * m as f64 - 0.25) * PI;
    beta - (mu - 1.0) / (8.0 * beta)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut sa = f(a).signum();
    while b - a > 1e-14 * b.max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sa {
            a = mid;
            sa = fm.signum();
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
