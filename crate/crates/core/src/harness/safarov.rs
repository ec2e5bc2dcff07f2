use log::warn;
use serde::{Deserialize, Serialize};

use super::interlacing::InequalityRow;
use super::{build_levels, extrapolated, BoundaryCondition, HarnessOptions, Problem};
use crate::boundary_ops::plane_wave_form;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafarovSample {
    pub eta_input: [f64; 2],
    /// Rescaled to `|eta|^2 = lambda_{D,j}`.
    pub eta: [f64; 2],
    pub value: f64,
    pub certifies: bool,
}

/// Plane-wave sign checks on the circle `|eta|^2 = lambda_{D,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafarovReport {
    pub j: usize,
    pub lambda_dirichlet: f64,
    pub samples: Vec<SafarovSample>,
    /// Some input direction had the wrong length and was rescaled.
    pub renormalized: bool,
    /// One direction with `<e, Theta e> <= 0`: hypothesis of the weak
    /// inequality `lambda_{Theta,j+1} <= lambda_{D,j}`.
    pub weak_certified: bool,
    /// Two distinct such directions: hypothesis of the strict inequality.
    pub strict_certified: bool,
    /// The interlacing comparison at the same `j`.
    pub interlacing: InequalityRow,
}

/// Evaluates the plane-wave form at each supplied direction after rescaling
/// it onto the circle of radius `lambda_{D,j}^{1/2}`, with `lambda_{D,j}`
/// extrapolated from `levels`.
pub fn safarov_weak_check(
    problem: &Problem,
    j: usize,
    etas: &[[f64; 2]],
    levels: &[usize],
    opts: &HarnessOptions,
) -> Result<SafarovReport> {
    if etas.is_empty() {
        return Err(Error::InvalidArgument("at least one direction is required".into()));
    }
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let discs = build_levels(problem, levels)?;
    let dirichlet = extrapolated(&discs, BoundaryCondition::Dirichlet, j + 2, &opts.solve)?;
    let robin = extrapolated(&discs, BoundaryCondition::Robin, j + 3, &opts.solve)?;
    if dirichlet.len() < j || robin.len() < j + 1 {
        return Err(Error::InsufficientWindow(format!("index {j} beyond the computed spectra")));
    }
    let lambda = dirichlet.values[j - 1];
    let radius = lambda.max(0.0).sqrt();
    let finest = discs.last().expect("two levels");
    let mut renormalized = false;
    let mut samples = Vec::with_capacity(etas.len());
    for &e in etas {
        let r = e[0].hypot(e[1]);
        if r == 0.0 {
            return Err(Error::InvalidArgument("directions must be nonzero".into()));
        }
        if (r - radius).abs() > 1e-9 * radius {
            renormalized = true;
        }
        let eta = [e[0] * radius / r, e[1] * radius / r];
        let value = plane_wave_form(&finest.traversal, &problem.spec, eta)?;
        samples.push(SafarovSample { eta_input: e, eta, value, certifies: value <= opts.sign_tol });
    }
    if renormalized {
        warn!("directions rescaled to |eta|^2 = {lambda}");
    }
    let good: Vec<[f64; 2]> = samples.iter().filter(|s| s.certifies).map(|s| s.eta).collect();
    let distinct =
        good.iter().enumerate().any(|(a, x)| good[a + 1..].iter().any(|y| (x[0] - y[0]).hypot(x[1] - y[1]) > 1e-9 * radius.max(1.0)));
    Ok(SafarovReport {
        j,
        lambda_dirichlet: lambda,
        samples,
        renormalized,
        weak_certified: !good.is_empty(),
        strict_certified: distinct,
        interlacing: InequalityRow::new(j, &robin, &dirichlet),
    })
}
