//! Reference spectra that do not go through the finite element pipeline:
//! separable rectangles, the Robin interval and the disk.

mod bessel;
mod robin1d;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, bessel_zero, bessel_zeros};
pub use robin1d::{robin_1d, robin_characteristic, robin_zero_count};

use crate::eigen::{merge_multiplicities, spectrum_csv};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    TranscendentalRootfind,
    BesselRootfind,
}

/// Ascending reference eigenvalues, each with a mode label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<String>,
    pub provenance: Provenance,
}

impl OracleSpectrum {
    fn from_pairs(mut pairs: Vec<(f64, String)>, count: usize, provenance: Provenance) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        pairs.truncate(count);
        let (eigenvalues, labels) = pairs.into_iter().unzip();
        Self { eigenvalues, labels, provenance }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn merged(&self) -> Vec<(f64, usize)> {
        merge_multiplicities(&self.eigenvalues)
    }

    /// Spectrum CSV with an extra `mode_label` column.
    pub fn to_csv(&self) -> String {
        let mult: Vec<usize> = self.merged().iter().flat_map(|&(_, m)| std::iter::repeat_n(m, m)).collect();
        spectrum_csv(&self.eigenvalues, &mult, None, Some(&self.labels))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectangleBc {
    Dirichlet,
    Neumann,
    /// Constant Robin coefficient on all four sides.
    Robin(f64),
}

/// Smallest `count` eigenvalues of the Laplacian on `(0,a) x (0,b)`.
pub fn rectangle_spectrum(a: f64, b: f64, bc: RectangleBc, count: usize) -> Result<OracleSpectrum> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("rectangle sides must be positive, got {a} x {b}")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    // the `count` smallest sums only use the first `count` modes per direction
    let (xs, ys, provenance) = match bc {
        RectangleBc::Dirichlet => (interval_modes(a, 1, count), interval_modes(b, 1, count), Provenance::ClosedForm),
        RectangleBc::Neumann => (interval_modes(a, 0, count), interval_modes(b, 0, count), Provenance::ClosedForm),
        RectangleBc::Robin(theta) => {
            let x = robin_1d(theta, a, count)?;
            let y = robin_1d(theta, b, count)?;
            (x.eigenvalues, y.eigenvalues, x.provenance)
        }
    };
    let offset = usize::from(bc == RectangleBc::Dirichlet);
    let mut pairs = Vec::with_capacity(count * count);
    for (p, x) in xs.iter().enumerate() {
        for (q, y) in ys.iter().enumerate() {
            pairs.push((x + y, format!("({},{})", p + offset, q + offset)));
        }
    }
    Ok(OracleSpectrum::from_pairs(pairs, count, provenance))
}

fn interval_modes(l: f64, first: usize, count: usize) -> Vec<f64> {
    (first..first + count).map(|k| (k as f64 * PI / l).powi(2)).collect()
}

/// Smallest `count` Dirichlet eigenvalues `(j_{m,k} / radius)^2` of the
/// disk, with multiplicity two for `m >= 1`.
pub fn disk_dirichlet_spectrum(radius: f64, count: usize) -> Result<OracleSpectrum> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if count == 0 {
        return Ok(OracleSpectrum { eigenvalues: vec![], labels: vec![], provenance: Provenance::BesselRootfind });
    }
    // j_{0,count} bounds the count-th eigenvalue from above
    let top = *bessel_zeros(0, count)?.last().expect("count >= 1");
    let mut pairs = Vec::new();
    for m in 0.. {
        let mut zeros = Vec::new();
        let mut k = 1;
        loop {
            let z = bessel_zero(m, k)?;
            if z > top {
                break;
            }
            zeros.push(z);
            k += 1;
        }
        if zeros.is_empty() {
            break;
        }
        for (i, z) in zeros.iter().enumerate() {
            let v = (z / radius).powi(2);
            let copies = if m == 0 { 1 } else { 2 };
            for _ in 0..copies {
                pairs.push((v, format!("({m},{})", i + 1)));
            }
        }
    }
    Ok(OracleSpectrum::from_pairs(pairs, count, Provenance::BesselRootfind))
}
