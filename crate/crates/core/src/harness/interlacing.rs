use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::counting::{counting_verdict, CountingReport};
use super::{build_levels, extrapolated, BoundaryCondition, Discretization, HarnessOptions, Problem, Verdict};
use crate::boundary_ops::{check_nonpositive, classify, plane_wave_form, AdmissibilityVerdict, BoundaryOperatorSpec, NonpositivityVerdict};
use crate::eigen::{ExtrapolatedSpectrum, SolveOptions, MERGE_RTOL, MIN_ORDER, SAFETY};
use crate::error::{Error, Result};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: &str = "1.0";

/// Compares `lambda_theta` against `lambda_dirichlet`, both with bars.
pub fn interlacing_verdict(theta: f64, theta_err: f64, dirichlet: f64, dirichlet_err: f64) -> Verdict {
    if theta + theta_err < dirichlet - dirichlet_err {
        Verdict::HoldsStrict
    } else if theta - theta_err > dirichlet + dirichlet_err {
        Verdict::Violated
    } else if theta <= dirichlet {
        Verdict::HoldsWeak
    } else {
        Verdict::Inconclusive
    }
}

/// One `lambda_{Theta, j+1}` versus `lambda_{D, j}` comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub j: usize,
    pub lambda_theta: f64,
    pub lambda_theta_err: f64,
    pub lambda_dirichlet: f64,
    pub lambda_dirichlet_err: f64,
    /// `(lambda_D - err_D) - (lambda_Theta + err_Theta)`; positive when the
    /// strict inequality is certified.
    pub margin: f64,
    pub verdict: Verdict,
}

impl InequalityRow {
    pub(crate) fn new(j: usize, robin: &ExtrapolatedSpectrum, dirichlet: &ExtrapolatedSpectrum) -> Self {
        let (lt, et) = (robin.values[j], robin.errors[j]);
        let (ld, ed) = (dirichlet.values[j - 1], dirichlet.errors[j - 1]);
        Self {
            j,
            lambda_theta: lt,
            lambda_theta_err: et,
            lambda_dirichlet: ld,
            lambda_dirichlet_err: ed,
            margin: (ld - ed) - (lt + et),
            verdict: interlacing_verdict(lt, et, ld, ed),
        }
    }
}

/// `lambda_{Theta,j} <= lambda_{N,j} <= lambda_{D,j}` within bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub j: usize,
    pub lambda_theta: f64,
    pub lambda_theta_err: f64,
    pub lambda_neumann: f64,
    pub lambda_neumann_err: f64,
    pub lambda_dirichlet: f64,
    pub lambda_dirichlet_err: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveSample {
    pub eta: [f64; 2],
    pub value: f64,
    pub pass: bool,
}

/// Hypothesis checks on the boundary operator at the finest level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    /// `<e, Theta e> <= 0` for the sampled plane waves.
    pub plane_wave: Vec<PlaneWaveSample>,
    pub plane_wave_pass: bool,
    pub nonpositive: NonpositivityVerdict,
    pub admissibility: AdmissibilityVerdict,
    /// Admissible, and either nonpositive or passing every plane-wave sample.
    pub preconditions_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub domain: String,
    pub theta: String,
    pub theta_hash: String,
    pub j_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    pub solve: SolveOptions,
    pub sign_tol: f64,
    pub delta: f64,
    pub eta_samples: usize,
    pub seed: u64,
    pub merge_rtol: f64,
    pub richardson_safety: f64,
    pub richardson_min_order: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: String,
    pub problem: ProblemInfo,
    pub rows: Vec<InequalityRow>,
    /// Present when the Neumann comparison was requested; meaningful for
    /// nonpositive operators (see `conditions.nonpositive`).
    pub chain: Vec<ChainRow>,
    pub conditions: ConditionSummary,
    pub counting: Vec<CountingReport>,
    pub environment: Environment,
    pub notes: Vec<String>,
}

impl InequalityReport {
    /// Most severe verdict over rows and counting checks; an unmet
    /// precondition downgrades certified rows to inconclusive.
    pub fn worst(&self) -> Verdict {
        let mut worst =
            self.rows.iter().map(|r| r.verdict).chain(self.counting.iter().map(|c| c.verdict)).max().unwrap_or(Verdict::HoldsStrict);
        if !self.conditions.preconditions_met {
            worst = worst.max(Verdict::Inconclusive);
        }
        worst
    }

    /// `0` all certified, `2` something inconclusive or a failed
    /// precondition, `3` a violation.
    pub fn exit_code(&self) -> i32 {
        match self.worst() {
            Verdict::HoldsStrict => 0,
            Verdict::HoldsWeak | Verdict::Inconclusive => 2,
            Verdict::Violated => 3,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Evaluates the operator hypotheses on one discretization. Plane waves are
/// sampled at `eta = 0`, at one seeded direction on each circle
/// `|eta|^2 = lambda_{D,j}`, and at `opts.eta_samples` seeded points in the
/// disk of radius `1.5 max sqrt(lambda_{D,j})`.
pub(crate) fn conditions(
    problem: &Problem,
    disc: &Discretization,
    dirichlet: &[f64],
    opts: &HarnessOptions,
    rng: &mut ChaCha8Rng,
) -> Result<ConditionSummary> {
    let mut etas = vec![[0.0, 0.0]];
    for &l in dirichlet {
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        let r = l.max(0.0).sqrt();
        etas.push([r * a.cos(), r * a.sin()]);
    }
    let rmax = 1.5 * dirichlet.iter().fold(1.0f64, |m, &l| m.max(l)).sqrt();
    for _ in 0..opts.eta_samples {
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        let r = rmax * rng.random::<f64>().sqrt();
        etas.push([r * a.cos(), r * a.sin()]);
    }
    let plane_wave = etas
        .into_iter()
        .map(|eta| {
            let value = plane_wave_form(&disc.traversal, &problem.spec, eta)?;
            Ok(PlaneWaveSample { eta, value, pass: value <= opts.sign_tol })
        })
        .collect::<Result<Vec<_>>>()?;
    let plane_wave_pass = plane_wave.iter().all(|s| s.pass);
    let nonpositive = check_nonpositive(&disc.theta, &disc.mesh, opts.sign_tol);
    let admissibility = classify(&problem.spec, &disc.mesh, &disc.traversal, opts.delta);
    let preconditions_met = admissibility.pass && (nonpositive.pass || plane_wave_pass);
    Ok(ConditionSummary { plane_wave, plane_wave_pass, nonpositive, admissibility, preconditions_met })
}

pub(crate) fn environment(levels: &[Discretization], opts: &HarnessOptions) -> Environment {
    Environment {
        levels: levels.iter().map(|d| d.level).collect(),
        h: levels.iter().map(|d| d.h()).collect(),
        solve: opts.solve,
        sign_tol: opts.sign_tol,
        delta: opts.delta,
        eta_samples: opts.eta_samples,
        seed: opts.seed,
        merge_rtol: MERGE_RTOL,
        richardson_safety: SAFETY,
        richardson_min_order: MIN_ORDER,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn check_window(ext: &ExtrapolatedSpectrum, need: usize, what: &str) -> Result<()> {
    if ext.len() < need {
        return Err(Error::InsufficientWindow(format!("{what}: {} eigenvalues available, {need} needed", ext.len())));
    }
    Ok(())
}

/// Solves the Robin and Dirichlet problems on nested levels, extrapolates
/// and compares `lambda_{Theta, j+1}` with `lambda_{D, j}` for
/// `j = 1..=j_max`. Also records the monotone chain against Neumann (when
/// `opts.chain`), counting checks and the operator hypotheses.
pub fn verify_interlacing(problem: &Problem, j_max: usize, levels: &[usize], opts: &HarnessOptions) -> Result<InequalityReport> {
    if j_max == 0 {
        return Err(Error::InvalidArgument("j_max must be at least 1".into()));
    }
    let discs = build_levels(problem, levels)?;
    info!("interlacing on {} with theta = {}, levels {levels:?}", problem.domain.label(), problem.spec);
    let robin = extrapolated(&discs, BoundaryCondition::Robin, j_max + 6, &opts.solve)?;
    let dirichlet = extrapolated(&discs, BoundaryCondition::Dirichlet, j_max + 4, &opts.solve)?;
    check_window(&robin, j_max + 1, "Robin")?;
    check_window(&dirichlet, j_max, "Dirichlet")?;

    let rows = (1..=j_max).map(|j| InequalityRow::new(j, &robin, &dirichlet)).collect();

    let mut chain = Vec::new();
    if opts.chain {
        let neumann = extrapolated(&discs, BoundaryCondition::Neumann, j_max, &opts.solve)?;
        for i in 0..j_max.min(neumann.len()) {
            let (t, et) = (robin.values[i], robin.errors[i]);
            let (n, en) = (neumann.values[i], neumann.errors[i]);
            let (d, ed) = (dirichlet.values[i], dirichlet.errors[i]);
            let holds = t - et <= n + en && n - en <= d + ed;
            chain.push(ChainRow {
                j: i + 1,
                lambda_theta: t,
                lambda_theta_err: et,
                lambda_neumann: n,
                lambda_neumann_err: en,
                lambda_dirichlet: d,
                lambda_dirichlet_err: ed,
                holds,
            });
        }
    }

    let counting = (1..=j_max).map(|j| counting_verdict(&robin, &dirichlet, j)).collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed(opts.seed));
    let finest = discs.last().expect("at least two levels");
    let conditions = conditions(problem, finest, &dirichlet.values[..j_max], opts, &mut rng)?;

    let mut notes = Vec::new();
    if matches!(problem.spec, BoundaryOperatorSpec::Zero) {
        notes.push("theta = 0: rows compare Neumann eigenvalue j+1 with Dirichlet eigenvalue j".into());
    }
    if !conditions.nonpositive.pass && opts.chain {
        notes.push("operator is not nonpositive: chain rows are informational".into());
    }
    if !conditions.preconditions_met {
        notes.push("operator hypotheses not met: no row is certified".into());
    }
    if let Some(orders) = &robin.orders {
        let low: Vec<usize> = (0..=j_max).filter(|&i| !robin.extrapolated[i]).map(|i| i + 1).collect();
        if !low.is_empty() {
            notes.push(format!(
                "Robin eigenvalues {low:?} not extrapolated (observed order below {MIN_ORDER}); orders {:?}",
                &orders[..=j_max]
            ));
        }
    }
    if dirichlet.orders.is_some() {
        let low: Vec<usize> = (0..j_max).filter(|&i| !dirichlet.extrapolated[i]).map(|i| i + 1).collect();
        if !low.is_empty() {
            notes.push(format!("Dirichlet eigenvalues {low:?} not extrapolated (observed order below {MIN_ORDER})"));
        }
    }

    Ok(InequalityReport {
        schema_version: SCHEMA_VERSION.into(),
        problem: ProblemInfo { domain: problem.domain.label(), theta: problem.spec.to_string(), theta_hash: problem.spec.hash(), j_max },
        rows,
        chain,
        conditions,
        counting,
        environment: environment(&discs, opts),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_boundaries() {
        assert_eq!(interlacing_verdict(1.0, 0.1, 2.0, 0.1), Verdict::HoldsStrict);
        assert_eq!(interlacing_verdict(3.0, 0.1, 2.0, 0.1), Verdict::Violated);
        assert_eq!(interlacing_verdict(1.95, 0.1, 2.0, 0.1), Verdict::HoldsWeak);
        assert_eq!(interlacing_verdict(2.05, 0.1, 2.0, 0.1), Verdict::Inconclusive);
    }
}
