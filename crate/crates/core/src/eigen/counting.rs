use log::warn;
use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::ldlt::{LdlFactor, Ordering};
use crate::sparse::CsrMatrix;

/// `#{ j : lambda_j <= lambda }` over a computed spectrum.
///
/// Fails when `lambda` lies beyond the largest computed eigenvalue of an
/// incomplete spectrum, since the count could then be an undercount.
pub fn counting_function(spectrum: &Spectrum, lambda: f64) -> Result<usize> {
    match spectrum.largest() {
        Some(top) if lambda > top && !spectrum.is_complete() => {
            Err(Error::InsufficientWindow(format!("counting at {lambda} but only eigenvalues up to {top} were computed")))
        }
        None if !spectrum.is_complete() => Err(Error::InsufficientWindow("empty spectrum".into())),
        _ => Ok(spectrum.eigenvalues.iter().filter(|&&v| v <= lambda).count()),
    }
}

/// Result of a Sylvester count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaCount {
    /// `#{ j : lambda_j < shift }`.
    pub count: usize,
    /// The shift at which the factorization succeeded.
    pub shift: f64,
    pub perturbed: bool,
}

/// Eigenvalue counts via the inertia of `K - lambda M`, reusing one
/// fill-reducing ordering across shifts.
pub struct InertiaCounter<'a> {
    k: &'a CsrMatrix,
    m: &'a CsrMatrix,
    ordering: Ordering,
}

impl<'a> InertiaCounter<'a> {
    pub fn new(k: &'a CsrMatrix, m: &'a CsrMatrix) -> Result<Self> {
        if k.dim() != m.dim() {
            return Err(Error::Dimension(format!("K is {}, M is {}", k.dim(), m.dim())));
        }
        let ordering = Ordering::amd(&k.axpby(1.0, m, 1.0)?);
        Ok(Self { k, m, ordering })
    }

    /// Number of eigenvalues strictly below `lambda`. When `lambda` is
    /// numerically an eigenvalue the factorization breaks down; the shift is
    /// then moved down by `1e-10` relative, which keeps the strict count.
    pub fn count(&self, lambda: f64) -> Result<InertiaCount> {
        let scale = lambda.abs().max(1.0);
        let mut shift = lambda;
        for attempt in 0..10 {
            let a = self.k.axpby(1.0, self.m, -shift)?;
            match LdlFactor::with_ordering(&a, &self.ordering) {
                Ok(f) => {
                    let perturbed = attempt > 0;
                    if perturbed {
                        warn!("shift {lambda} is numerically an eigenvalue; counted at {shift}");
                    }
                    return Ok(InertiaCount { count: f.inertia().negative, shift, perturbed });
                }
                Err(Error::FactorizationBreakdown(_)) => shift = lambda - 1e-10 * scale * 4f64.powi(attempt),
                Err(e) => return Err(e),
            }
        }
        Err(Error::NoConvergence(format!("inertia at {lambda} could not be computed")))
    }
}

/// One-shot [`InertiaCounter::count`].
pub fn inertia_count(k: &CsrMatrix, m: &CsrMatrix, lambda: f64) -> Result<InertiaCount> {
    InertiaCounter::new(k, m)?.count(lambda)
}
