use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Safety factor applied to the extrapolation correction.
pub const SAFETY: f64 = 2.0;
/// Observed orders below this refuse extrapolation.
pub const MIN_ORDER: f64 = 1.5;

/// Eigenvalue estimates with error bars from a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedSpectrum {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Observed convergence order per eigenvalue, when three levels were given.
    pub orders: Option<Vec<Option<f64>>>,
    /// Whether the value is extrapolated or the finest-level value.
    pub extrapolated: Vec<bool>,
}

impl ExtrapolatedSpectrum {
    /// Values known exactly (zero error), e.g. from a closed form.
    pub fn exact(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, errors: vec![0.0; n], orders: None, extrapolated: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.values[i] - self.errors[i]
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.values[i] + self.errors[i]
    }
}

/// Extrapolates eigenvalues from meshes of size `h`, `h/2` and optionally
/// `h/4`, assuming second-order convergence.
///
/// With two levels `lambda* = l_{h/2} + (l_{h/2} - l_h)/3` and the error is
/// `SAFETY * |l_{h/2} - lambda*|`. With three levels the observed order
/// `log2((l_h - l_{h/2}) / (l_{h/2} - l_{h/4}))` is checked first; when it is
/// undefined or below `MIN_ORDER` the finest value is returned unextrapolated
/// with the last level gap as its error.
pub fn richardson(coarse: &[f64], fine: &[f64], finest: Option<&[f64]>) -> Result<ExtrapolatedSpectrum> {
    if coarse.len() != fine.len() || finest.is_some_and(|f| f.len() != fine.len()) {
        return Err(Error::Dimension(format!("level lengths differ: {}, {}, {:?}", coarse.len(), fine.len(), finest.map(<[f64]>::len))));
    }
    let n = fine.len();
    let mut values = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut extrapolated = Vec::with_capacity(n);
    let extrapolate = |a: f64, b: f64| {
        let star = b + (b - a) / 3.0;
        (star, SAFETY * (b - star).abs())
    };
    match finest {
        None => {
            for i in 0..n {
                let (v, e) = extrapolate(coarse[i], fine[i]);
                values.push(v);
                errors.push(e);
                extrapolated.push(true);
            }
            Ok(ExtrapolatedSpectrum { values, errors, orders: None, extrapolated })
        }
        Some(ff) => {
            let mut orders = Vec::with_capacity(n);
            for i in 0..n {
                let order = observed_order(coarse[i], fine[i], ff[i]);
                orders.push(order);
                if order.is_some_and(|p| p >= MIN_ORDER) {
                    let (v, e) = extrapolate(fine[i], ff[i]);
                    values.push(v);
                    errors.push(e);
                    extrapolated.push(true);
                } else {
                    values.push(ff[i]);
                    errors.push((fine[i] - ff[i]).abs());
                    extrapolated.push(false);
                }
            }
            Ok(ExtrapolatedSpectrum { values, errors, orders: Some(orders), extrapolated })
        }
    }
}

/// `log2((a - b) / (b - c))`, or `None` when the differences do not share a
/// sign or vanish.
pub fn observed_order(a: f64, b: f64, c: f64) -> Option<f64> {
    let r = (a - b) / (b - c);
    (r.is_finite() && r > 0.0).then(|| r.log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quadratic_error() {
        // lambda(h) = 3 + 5 h^2
        let l = |h: f64| 3.0 + 5.0 * h * h;
        let r = richardson(&[l(0.1)], &[l(0.05)], None).unwrap();
        assert!((r.values[0] - 3.0).abs() < 1e-13);
        let r3 = richardson(&[l(0.2)], &[l(0.1)], Some(&[l(0.05)])).unwrap();
        assert!((r3.orders.as_ref().unwrap()[0].unwrap() - 2.0).abs() < 1e-9);
        assert!(r3.extrapolated[0]);
    }

    #[test]
    fn refuses_low_order() {
        // lambda(h) = 1 + h
        let r = richardson(&[1.4], &[1.2], Some(&[1.1])).unwrap();
        assert!(!r.extrapolated[0]);
        assert_eq!(r.values[0], 1.1);
        assert!((r.errors[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_levels() {
        let r = richardson(&[0.0], &[0.0], Some(&[0.0])).unwrap();
        assert_eq!(r.values[0], 0.0);
        assert_eq!(r.errors[0], 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(richardson(&[1.0, 2.0], &[1.0], None).is_err());
    }
}
