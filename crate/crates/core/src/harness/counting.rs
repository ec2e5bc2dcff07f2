use serde::{Deserialize, Serialize};

use super::{build_levels, extrapolated, BoundaryCondition, HarnessOptions, Problem, Verdict};
use crate::eigen::{ExtrapolatedSpectrum, MERGE_RTOL};
use crate::error::{Error, Result};

/// Whether at least `N_D(lambda_{D,j}) + 1` Robin eigenvalues lie strictly
/// below `lambda_{D,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub j: usize,
    pub lambda_dirichlet: f64,
    pub lambda_dirichlet_err: f64,
    /// `#{k : lambda_{D,k} <= lambda_{D,j}}`, multiple eigenvalues merged.
    pub n_dirichlet: usize,
    pub required: usize,
    /// Robin eigenvalues whose whole bar lies below the Dirichlet bar.
    pub certain_below: usize,
    /// Robin eigenvalues whose bar reaches below the top of the Dirichlet bar.
    pub possible_below: usize,
    /// Some computed Robin eigenvalue lies certainly above `lambda_{D,j}`,
    /// so no Robin eigenvalue below it can be missing.
    pub window_complete: bool,
    pub verdict: Verdict,
}

/// Counting check from extrapolated spectra (discrete statement).
///
/// `holds_strict` when `certain_below >= required`; `violated` when the
/// window is complete and `possible_below < required`; otherwise
/// `inconclusive`, e.g. when a cluster straddles `lambda_{D,j}` within bars.
pub fn counting_verdict(robin: &ExtrapolatedSpectrum, dirichlet: &ExtrapolatedSpectrum, j: usize) -> Result<CountingReport> {
    if j == 0 || j > dirichlet.len() {
        return Err(Error::InsufficientWindow(format!("Dirichlet index {j} outside 1..={}", dirichlet.len())));
    }
    let (ld, ed) = (dirichlet.values[j - 1], dirichlet.errors[j - 1]);
    let tie = MERGE_RTOL * ld.abs().max(f64::MIN_POSITIVE);
    let n_dirichlet = dirichlet.values.iter().filter(|&&v| v <= ld + tie).count();
    if n_dirichlet == dirichlet.len() {
        // the cluster of lambda_{D,j} may continue past the known values
        return Err(Error::InsufficientWindow(format!("no Dirichlet eigenvalue above the cluster at {ld}")));
    }
    let required = n_dirichlet + 1;
    let certain_below = (0..robin.len()).filter(|&k| robin.upper(k) < ld - ed).count();
    let possible_below = (0..robin.len()).filter(|&k| robin.lower(k) < ld + ed).count();
    let window_complete = (0..robin.len()).any(|k| robin.lower(k) > ld + ed);
    let verdict = if certain_below >= required {
        Verdict::HoldsStrict
    } else if window_complete && possible_below < required {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(CountingReport {
        j,
        lambda_dirichlet: ld,
        lambda_dirichlet_err: ed,
        n_dirichlet,
        required,
        certain_below,
        possible_below,
        window_complete,
        verdict,
    })
}

/// Counting check on nested levels. Dirichlet values come from the solver
/// unless `oracle_dirichlet` supplies exact ones. The Robin window grows
/// until it passes `lambda_{D,j}`.
pub fn verify_counting(
    problem: &Problem,
    j: usize,
    levels: &[usize],
    oracle_dirichlet: Option<&[f64]>,
    opts: &HarnessOptions,
) -> Result<CountingReport> {
    let discs = build_levels(problem, levels)?;
    let dirichlet = match oracle_dirichlet {
        Some(v) => ExtrapolatedSpectrum::exact(v.to_vec()),
        None => extrapolated(&discs, BoundaryCondition::Dirichlet, j + 4, &opts.solve)?,
    };
    let max_dim = discs[0].mesh.n_nodes();
    let mut count = j + 6;
    loop {
        let robin = extrapolated(&discs, BoundaryCondition::Robin, count.min(max_dim), &opts.solve)?;
        let report = counting_verdict(&robin, &dirichlet, j)?;
        if report.window_complete || count >= max_dim {
            return Ok(report);
        }
        count *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(v: &[f64]) -> ExtrapolatedSpectrum {
        ExtrapolatedSpectrum::exact(v.to_vec())
    }

    #[test]
    fn square_neumann_counts() {
        let pi2 = std::f64::consts::PI.powi(2);
        let n = exact(&[0.0, pi2, pi2, 2.0 * pi2, 4.0 * pi2, 4.0 * pi2, 5.0 * pi2, 5.0 * pi2, 8.0 * pi2]);
        let d = exact(&[2.0 * pi2, 5.0 * pi2, 5.0 * pi2, 8.0 * pi2, 10.0 * pi2]);
        let r = counting_verdict(&n, &d, 1).unwrap();
        assert_eq!((r.n_dirichlet, r.certain_below, r.verdict), (1, 3, Verdict::HoldsStrict));
        let r = counting_verdict(&n, &d, 2).unwrap();
        assert_eq!(r.n_dirichlet, 3);
        assert_eq!(r.certain_below, 6);
        assert_eq!(r.verdict, Verdict::HoldsStrict);
    }

    #[test]
    fn shifted_spectrum_is_violated() {
        let robin = exact(&[10.0, 11.0, 12.0]);
        let d = exact(&[5.0, 8.0]);
        assert_eq!(counting_verdict(&robin, &d, 1).unwrap().verdict, Verdict::Violated);
    }

    #[test]
    fn straddling_cluster_is_inconclusive() {
        let robin = ExtrapolatedSpectrum { errors: vec![0.0, 0.5, 0.0], ..exact(&[1.0, 4.9, 9.0]) };
        let d = exact(&[5.0, 8.0]);
        assert_eq!(counting_verdict(&robin, &d, 1).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn short_window_never_violates() {
        let robin = exact(&[1.0]);
        let d = exact(&[5.0, 8.0]);
        assert_eq!(counting_verdict(&robin, &d, 1).unwrap().verdict, Verdict::Inconclusive);
    }
}
