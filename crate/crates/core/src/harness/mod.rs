//! Verification campaigns: interlacing and counting inequalities between
//! Robin and Dirichlet spectra, the plane-wave trial space, single- and
//! two-direction plane-wave checks, and the trace and coercivity constants.

mod constants;
mod counting;
mod filonov;
mod interlacing;
mod safarov;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use constants::{coercivity_kappa, trace_beta, COERCIVITY_C0};
pub use counting::{counting_verdict, verify_counting, CountingReport};
pub use filonov::{filonov_series, filonov_trial_check, FilonovOptions, FilonovSeries, TrialSpaceReport};
pub use interlacing::{
    interlacing_verdict, verify_interlacing, ChainRow, ConditionSummary, Environment, InequalityReport, InequalityRow, PlaneWaveSample,
    ProblemInfo, SCHEMA_VERSION,
};
pub use safarov::{safarov_weak_check, SafarovReport, SafarovSample};

use crate::assembly::{assemble_mass, assemble_stiffness, reduce_dirichlet, DirichletReduction, DiscreteForm};
use crate::boundary_ops::{theta_matrix, BoundaryOperatorSpec, DEFAULT_DELTA};
use crate::eigen::{self, ExtrapolatedSpectrum, ProblemDescriptor, SolveOptions, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{mesh_at_level, BoundaryTraversal, PolygonalDomain, TriangleMesh};
use crate::sparse::CsrMatrix;

/// Outcome of comparing two eigenvalue estimates with error bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsStrict,
    /// Bars overlap but the central values are ordered as claimed.
    HoldsWeak,
    Inconclusive,
    Violated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::HoldsStrict => "holds_strict",
            Verdict::HoldsWeak => "holds_weak",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
        }
    }
}

/// A domain together with a boundary operator.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: PolygonalDomain,
    pub spec: BoundaryOperatorSpec,
}

impl Problem {
    pub fn new(domain: PolygonalDomain, spec: BoundaryOperatorSpec) -> Self {
        Self { domain, spec }
    }

    /// Seed derived from the problem text and a user seed.
    pub fn seed(&self, user_seed: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(self.domain.label().as_bytes());
        h.update(b"|");
        h.update(self.spec.to_string().as_bytes());
        h.update(user_seed.to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessOptions {
    pub solve: SolveOptions,
    /// Relative tolerance of the nonpositivity and plane-wave sign checks.
    pub sign_tol: f64,
    /// Smallness threshold for parts tagged `Theta3`.
    pub delta: f64,
    /// Random plane-wave directions sampled on top of the structured ones.
    pub eta_samples: usize,
    /// Also solve the Neumann problem and report the monotone chain.
    pub chain: bool,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), sign_tol: 1e-10, delta: DEFAULT_DELTA, eta_samples: 16, chain: true, seed: 42 }
    }
}

/// Matrices of one mesh level.
pub struct Discretization {
    pub level: usize,
    pub mesh: TriangleMesh,
    pub traversal: BoundaryTraversal,
    pub stiffness: DiscreteForm,
    pub mass: DiscreteForm,
    pub theta: DiscreteForm,
    dirichlet: DirichletReduction,
    domain_label: String,
    theta_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Robin,
}

impl Discretization {
    pub fn new(problem: &Problem, level: usize) -> Result<Self> {
        let mesh = mesh_at_level(&problem.domain, level)?;
        let traversal = BoundaryTraversal::new(&mesh)?;
        let stiffness = assemble_stiffness(&mesh)?;
        let mass = assemble_mass(&mesh)?;
        let theta = theta_matrix(&mesh, &traversal, &problem.spec)?;
        let dirichlet = reduce_dirichlet(&stiffness, &mass, &mesh)?;
        Ok(Self {
            level,
            mesh,
            traversal,
            stiffness,
            mass,
            theta,
            dirichlet,
            domain_label: problem.domain.label(),
            theta_hash: problem.spec.hash(),
        })
    }

    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    /// `A + B_Theta`.
    pub fn robin_matrix(&self) -> Result<CsrMatrix> {
        self.stiffness.matrix.add(&self.theta.matrix)
    }

    pub fn dirichlet(&self) -> &DirichletReduction {
        &self.dirichlet
    }

    /// Pencil `(K, M)` for a boundary condition.
    pub fn pencil(&self, bc: BoundaryCondition) -> Result<(CsrMatrix, CsrMatrix)> {
        Ok(match bc {
            BoundaryCondition::Dirichlet => (self.dirichlet.stiffness.matrix.clone(), self.dirichlet.mass.matrix.clone()),
            BoundaryCondition::Neumann => (self.stiffness.matrix.clone(), self.mass.matrix.clone()),
            BoundaryCondition::Robin => (self.robin_matrix()?, self.mass.matrix.clone()),
        })
    }

    pub fn solve(&self, bc: BoundaryCondition, count: usize, opts: &SolveOptions) -> Result<Spectrum> {
        let (k, m) = self.pencil(bc)?;
        let count = count.min(k.dim());
        let mut s = eigen::solve(&k, &m, count, opts)?;
        s.descriptor = ProblemDescriptor {
            domain: self.domain_label.clone(),
            boundary_condition: match bc {
                BoundaryCondition::Dirichlet => "dirichlet".into(),
                BoundaryCondition::Neumann => "neumann".into(),
                BoundaryCondition::Robin => "robin".into(),
            },
            theta_hash: if bc == BoundaryCondition::Robin { self.theta_hash.clone() } else { String::new() },
            level: self.level,
            h: self.mesh.h,
        };
        Ok(s)
    }
}

/// Spectra at each level for one boundary condition, extrapolated.
pub(crate) fn extrapolated(
    levels: &[Discretization],
    bc: BoundaryCondition,
    count: usize,
    opts: &SolveOptions,
) -> Result<ExtrapolatedSpectrum> {
    let spectra = levels.iter().map(|d| d.solve(bc, count, opts)).collect::<Result<Vec<_>>>()?;
    extrapolate_spectra(&spectra)
}

/// Richardson extrapolation over the last two or three spectra.
pub fn extrapolate_spectra(spectra: &[Spectrum]) -> Result<ExtrapolatedSpectrum> {
    let n = spectra.iter().map(Spectrum::len).min().unwrap_or(0);
    let vals = |s: &Spectrum| s.eigenvalues[..n].to_vec();
    match spectra.len() {
        0 | 1 => Err(Error::InvalidArgument("extrapolation needs at least two levels".into())),
        2 => eigen::richardson(&vals(&spectra[0]), &vals(&spectra[1]), None),
        k => {
            let ff = vals(&spectra[k - 1]);
            eigen::richardson(&vals(&spectra[k - 3]), &vals(&spectra[k - 2]), Some(&ff))
        }
    }
}

pub(crate) fn build_levels(problem: &Problem, levels: &[usize]) -> Result<Vec<Discretization>> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument("at least two mesh levels are required".into()));
    }
    if levels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidArgument(format!("levels must be consecutive, got {levels:?}")));
    }
    levels.iter().map(|&l| Discretization::new(problem, l)).collect()
}
